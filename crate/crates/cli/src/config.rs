//! `promptlang.toml` loading.

use std::path::{Path, PathBuf};

use promptlang::LintConfig;
use serde::Deserialize;

pub const CONFIG_FILE: &str = "promptlang.toml";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    required_modules: Option<Vec<String>>,
    scenario_strict: Option<bool>,
    max_element_length: Option<usize>,
    enabled_rules: Option<Vec<String>>,
}

/// The nearest `promptlang.toml` in `start` or one of its ancestors.
pub fn find_config(start: &Path) -> Option<PathBuf> {
    start.ancestors().map(|d| d.join(CONFIG_FILE)).find(|p| p.is_file())
}

/// Applies the file's keys on top of the defaults.
pub fn parse_config(source: &str) -> Result<LintConfig, String> {
    let file: ConfigFile = toml::from_str(source).map_err(|e| e.message().to_string())?;
    let mut config = LintConfig::default();
    if let Some(v) = file.required_modules {
        config.required_modules = v;
    }
    if let Some(v) = file.scenario_strict {
        config.scenario_strict = v;
    }
    if let Some(v) = file.max_element_length {
        config.max_element_length = v;
    }
    if let Some(v) = file.enabled_rules {
        config.enabled_rules = v.into_iter().collect();
    }
    Ok(config)
}

pub fn load_config(explicit: Option<&Path>, cwd: &Path) -> Result<LintConfig, String> {
    let path = match explicit {
        Some(p) => p.to_path_buf(),
        None => match find_config(cwd) {
            Some(p) => p,
            None => return Ok(LintConfig::default()),
        },
    };
    let source = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&source).map_err(|e| format!("{}: {e}", path.display()))
}
