use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::ModuleName;
use crate::registry::{InherentModule, ScenarioMatrix};
use crate::rules::{self, Stage, RULES};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("unknown rule code `{0}`")]
    UnknownRule(String),
    #[error("required module `{0}` is neither inherent nor registered")]
    UnknownModule(String),
    #[error("max_element_length must be at least 1")]
    ZeroLength,
    #[error("min_module_elements must be at least 1")]
    ZeroMinElements,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintConfig {
    /// Module names or aliases; extensions must be registered.
    pub required_modules: Vec<String>,
    /// Escalates off-matrix modules to errors.
    pub scenario_strict: bool,
    /// In characters, per element field.
    pub max_element_length: usize,
    /// Lint-stage rule codes to run. Parse-stage codes are accepted and
    /// ignored since those checks cannot be turned off.
    pub enabled_rules: BTreeSet<String>,
    /// Silences unregistered-extension findings for ad hoc modules.
    pub allow_adhoc: bool,
    /// Threshold for the experimental thin-module rule.
    pub min_module_elements: usize,
}

impl Default for LintConfig {
    fn default() -> Self {
        LintConfig {
            required_modules: vec!["Profile".into(), "Goal".into()],
            scenario_strict: false,
            max_element_length: 500,
            enabled_rules: default_rules(),
            allow_adhoc: false,
            min_module_elements: 2,
        }
    }
}

/// Lint-stage rules that run unless configured otherwise.
pub fn default_rules() -> BTreeSet<String> {
    RULES.iter().filter(|r| r.stage == Stage::Lint && r.enabled_by_default).map(|r| r.code.to_string()).collect()
}

impl LintConfig {
    /// Copy with one rule turned off.
    pub fn without(&self, code: &str) -> LintConfig {
        let mut out = self.clone();
        out.enabled_rules.retain(|c| !c.eq_ignore_ascii_case(code));
        out
    }

    /// Copy with one rule turned on.
    pub fn with(&self, code: &str) -> LintConfig {
        let mut out = self.clone();
        out.enabled_rules.insert(code.to_ascii_uppercase());
        out
    }

    pub(crate) fn resolve(&self, matrix: &ScenarioMatrix) -> Result<Resolved, ConfigError> {
        if self.max_element_length == 0 {
            return Err(ConfigError::ZeroLength);
        }
        if self.min_module_elements == 0 {
            return Err(ConfigError::ZeroMinElements);
        }
        let mut enabled = BTreeSet::new();
        for code in &self.enabled_rules {
            let rule = rules::lookup(code).ok_or_else(|| ConfigError::UnknownRule(code.clone()))?;
            if rule.stage == Stage::Lint {
                enabled.insert(rule.code);
            }
        }
        let mut required = Vec::new();
        for name in &self.required_modules {
            let module = match InherentModule::from_name(name) {
                Some(m) => ModuleName::Inherent(m),
                None => match matrix.extension(name) {
                    Some(ext) => ModuleName::Extension(ext.name.clone()),
                    None => return Err(ConfigError::UnknownModule(name.clone())),
                },
            };
            if !required.contains(&module) {
                required.push(module);
            }
        }
        Ok(Resolved { enabled, required })
    }
}

pub(crate) struct Resolved {
    pub enabled: BTreeSet<&'static str>,
    pub required: Vec<ModuleName>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::registry::builtin_matrix;

    #[test]
    fn defaults() {
        let c = LintConfig::default();
        let r = c.resolve(&builtin_matrix()).unwrap();
        assert!(!r.enabled.contains(rules::THIN_MODULE));
        assert!(r.enabled.contains(rules::OFF_MATRIX));
        assert_eq!(r.required.len(), 2);
    }

    #[test]
    fn rejects_bad_config() {
        let m = builtin_matrix();
        let mut c = LintConfig::default();
        c.enabled_rules.insert("P9-NOPE".into());
        assert_eq!(c.resolve(&m).err(), Some(ConfigError::UnknownRule("P9-NOPE".into())));
        let c = LintConfig { required_modules: vec!["Safety".into()], ..LintConfig::default() };
        assert!(matches!(c.resolve(&m), Err(ConfigError::UnknownModule(_))));
        let c = LintConfig { max_element_length: 0, ..LintConfig::default() };
        assert!(c.resolve(&m).is_err());
    }

    #[test]
    fn parse_codes_are_ignored() {
        let c = LintConfig::default().with(rules::DUP_MODULE);
        assert!(!c.resolve(&builtin_matrix()).unwrap().enabled.contains(rules::DUP_MODULE));
    }
}
