use std::cmp::Ordering;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::model::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Info,
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Info => "info",
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// One of the codes in [`crate::rules::RULES`].
    pub code: &'static str,
    pub message: String,
    pub span: Span,
    pub file: Option<PathBuf>,
}

impl Diagnostic {
    pub fn new(severity: Severity, code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity, code, message: message.into(), span, file: None }
    }

    pub fn error(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Self::new(Severity::Error, code, span, message)
    }

    pub fn warning(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Self::new(Severity::Warning, code, span, message)
    }

    pub fn info(code: &'static str, span: Span, message: impl Into<String>) -> Self {
        Self::new(Severity::Info, code, span, message)
    }

    pub fn with_file(mut self, file: impl Into<PathBuf>) -> Self {
        self.file = Some(file.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// The line-delimited JSON record: `{file, line, column, severity, code, message}`.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            file: Option<String>,
            line: usize,
            column: usize,
            severity: Severity,
            code: &'a str,
            message: &'a str,
        }
        serde_json::to_string(&Record {
            file: self.file.as_ref().map(|p| p.display().to_string()),
            line: self.span.line,
            column: self.span.column,
            severity: self.severity,
            code: self.code,
            message: &self.message,
        })
        .expect("diagnostic records always serialize")
    }

    /// Ordering by (file, line, column, code).
    pub fn source_order(&self, other: &Self) -> Ordering {
        (&self.file, self.span.line, self.span.column, self.code).cmp(&(
            &other.file,
            other.span.line,
            other.span.column,
            other.code,
        ))
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}:", file.display())?;
        }
        write!(f, "{}: {}[{}]: {}", self.span, self.severity, self.code, self.message)
    }
}

pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by(Diagnostic::source_order);
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}
