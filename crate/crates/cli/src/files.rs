//! File discovery, sidecar bindings and the file-system resolver.

use std::path::{Path, PathBuf};

use promptlang::{parse, ComposeError, Format, PromptDocument, Resolved, Resolver, TemplateBindings};
use walkdir::WalkDir;

const SUFFIXES: [&str; 4] = [".lgpt.md", ".lgpt.json", ".md", ".json"];

pub fn is_prompt_file(path: &Path) -> bool {
    path.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".lgpt.md") || n.ends_with(".lgpt.json"))
}

/// Explicit files are taken as given; directories contribute their
/// `*.lgpt.md` / `*.lgpt.json` files. The result is sorted and deduplicated.
pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>, String> {
    let mut out = Vec::new();
    for path in paths {
        if path.is_dir() {
            for entry in WalkDir::new(path).sort_by_file_name() {
                let entry = entry.map_err(|e| e.to_string())?;
                if entry.file_type().is_file() && is_prompt_file(entry.path()) {
                    out.push(entry.into_path());
                }
            }
        } else if path.is_file() {
            out.push(path.clone());
        } else {
            return Err(format!("{}: no such file or directory", path.display()));
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// File name without its prompt suffix: `dir/editor.lgpt.md` -> `editor`.
pub fn label(path: &Path) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    SUFFIXES.iter().find_map(|s| name.strip_suffix(s)).unwrap_or(name).to_string()
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_file_name(format!("{}.bindings.json", label(path)))
}

/// Bindings from `NAME.bindings.json` next to the file, if present.
pub fn load_sidecar(path: &Path) -> Result<Option<TemplateBindings>, String> {
    let sidecar = sidecar_path(path);
    if !sidecar.is_file() {
        return Ok(None);
    }
    let source = std::fs::read_to_string(&sidecar).map_err(|e| format!("{}: {e}", sidecar.display()))?;
    TemplateBindings::from_json(&source).map(Some).map_err(|e| format!("{}: {e}", sidecar.display()))
}

pub fn read(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Resolves `Extends` references relative to the referring file, then in
/// each template directory, trying the reference as written and with the
/// `.lgpt.md` and `.lgpt.json` suffixes.
pub struct FileResolver {
    pub template_dirs: Vec<PathBuf>,
}

impl FileResolver {
    fn candidates(&self, reference: &str, referrer_dir: &Path) -> Vec<PathBuf> {
        let mut dirs = vec![referrer_dir.to_path_buf()];
        dirs.extend(self.template_dirs.iter().cloned());
        let mut out = Vec::new();
        for dir in dirs {
            out.push(dir.join(reference));
            out.push(dir.join(format!("{reference}.lgpt.md")));
            out.push(dir.join(format!("{reference}.lgpt.json")));
        }
        out
    }

    /// Loads a file as the start of a chain.
    pub fn load(path: &Path) -> Result<Resolved, ComposeError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| ComposeError::InvalidBase { label: label(path), message: e.to_string() })?;
        let format = promptlang::detect_format(&source, Format::from_path(path));
        let parsed = parse(&source, format);
        let key = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
        match parsed.document {
            Some(document) => Ok(Resolved { key: key.display().to_string(), label: label(path), document }),
            None => Err(ComposeError::InvalidBase {
                label: label(path),
                message: parsed.diagnostics.iter().find(|d| d.is_error()).map(ToString::to_string).unwrap_or_default(),
            }),
        }
    }
}

impl Resolver for FileResolver {
    fn resolve(&self, reference: &str, referrer_key: &str) -> Result<Resolved, ComposeError> {
        let referrer_dir = Path::new(referrer_key).parent().unwrap_or(Path::new("."));
        let found = self.candidates(reference, referrer_dir).into_iter().find(|p| p.is_file());
        match found {
            Some(path) => Self::load(&path),
            None => Err(ComposeError::MissingBase {
                reference: reference.to_string(),
                referrer: label(Path::new(referrer_key)),
            }),
        }
    }
}

/// Resolves and merges the chain starting at an already parsed document.
pub fn compose_file(
    path: &Path,
    doc: &PromptDocument,
    template_dirs: &[PathBuf],
) -> Result<PromptDocument, ComposeError> {
    let key = path.canonicalize().unwrap_or_else(|_| path.to_path_buf());
    let start = Resolved { key: key.display().to_string(), label: label(path), document: doc.clone() };
    promptlang::compose(&start, &FileResolver { template_dirs: template_dirs.to_vec() })
}
