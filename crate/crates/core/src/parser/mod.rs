//! Parsers for the two serializations: the Markdown dialect and JSON.

mod json;
mod markdown;

use std::fmt;
use std::str::FromStr;

pub use json::parse_json;
pub use markdown::{parse_lead_clause, parse_markdown, LEAD_PREFIX, LEAD_SUFFIX};

use crate::diagnostic::{has_errors, Diagnostic};
use crate::model::{ElementPart, PromptDocument, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Markdown,
    Json,
}

impl Format {
    pub fn as_str(self) -> &'static str {
        match self {
            Format::Markdown => "md",
            Format::Json => "json",
        }
    }

    /// `.lgpt.md` / `.lgpt.json`, falling back to plain `.md` / `.json`.
    pub fn from_path(path: &std::path::Path) -> Option<Format> {
        let name = path.file_name()?.to_str()?;
        if name.ends_with(".lgpt.md") || name.ends_with(".md") {
            Some(Format::Markdown)
        } else if name.ends_with(".lgpt.json") || name.ends_with(".json") {
            Some(Format::Json)
        } else {
            None
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "md" | "markdown" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            other => Err(format!("unknown format `{other}` (expected md or json)")),
        }
    }
}

/// The hint wins; otherwise JSON iff the first non-whitespace character is `{`.
pub fn detect_format(source: &str, hint: Option<Format>) -> Format {
    hint.unwrap_or_else(|| {
        if source.trim_start_matches('\u{feff}').trim_start().starts_with('{') {
            Format::Json
        } else {
            Format::Markdown
        }
    })
}

/// A text field's location. When `exact`, character `k` of the field sits
/// at `span.column + k`; otherwise only the start is known (for example a
/// JSON string containing escapes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextSpan {
    pub span: Span,
    pub exact: bool,
}

impl TextSpan {
    pub fn exact(span: Span) -> Self {
        TextSpan { span, exact: true }
    }

    pub fn approximate(span: Span) -> Self {
        TextSpan { span, exact: false }
    }

    /// Span of `length` characters starting at character `offset` of the field.
    pub fn sub(&self, offset: usize, length: usize) -> Span {
        if self.exact {
            Span { length, ..self.span.shifted(offset) }
        } else {
            self.span
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementSpans {
    /// The whole element: its bullet line, or its `###` heading for procedures.
    pub span: Span,
    pub parts: Vec<(ElementPart, TextSpan)>,
}

impl ElementSpans {
    pub fn part(&self, part: ElementPart) -> Option<TextSpan> {
        self.parts.iter().find(|(p, _)| *p == part).map(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleSpans {
    pub heading: Span,
    pub elements: Vec<ElementSpans>,
}

/// Source locations parallel to a [`PromptDocument`]'s structure.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SourceMap {
    pub title: Span,
    pub scenario: Option<Span>,
    pub extends: Option<Span>,
    pub modules: Vec<ModuleSpans>,
}

impl SourceMap {
    pub fn module(&self, index: usize) -> Span {
        self.modules.get(index).map_or(self.title, |m| m.heading)
    }

    pub fn element(&self, module: usize, element: usize) -> Span {
        self.modules.get(module).and_then(|m| m.elements.get(element)).map_or_else(|| self.module(module), |e| e.span)
    }

    pub fn part(&self, module: usize, element: usize, part: ElementPart) -> TextSpan {
        self.modules
            .get(module)
            .and_then(|m| m.elements.get(element))
            .and_then(|e| e.part(part))
            .unwrap_or_else(|| TextSpan::approximate(self.element(module, element)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseResult {
    /// Present iff no diagnostic has Error severity.
    pub document: Option<PromptDocument>,
    pub source_map: Option<SourceMap>,
    /// In source order.
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub(crate) fn finish(
        document: Option<PromptDocument>,
        source_map: SourceMap,
        mut diagnostics: Vec<Diagnostic>,
    ) -> Self {
        crate::diagnostic::sort_diagnostics(&mut diagnostics);
        if has_errors(&diagnostics) || document.is_none() {
            ParseResult { document: None, source_map: None, diagnostics }
        } else {
            ParseResult { document, source_map: Some(source_map), diagnostics }
        }
    }

    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

pub fn parse(source: &str, format: Format) -> ParseResult {
    match format {
        Format::Markdown => parse_markdown(source),
        Format::Json => parse_json(source),
    }
}
