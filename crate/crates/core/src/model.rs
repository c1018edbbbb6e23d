//! Document object model for dual-layer prompts.
//!
//! A [`PromptDocument`] holds ordered [`ModuleInstance`]s, each holding
//! ordered [`Element`]s. All values validate their invariants on
//! construction and are immutable afterwards; derived equality is the
//! structural equality used throughout the crate.

use std::fmt;

use thiserror::Error;

use crate::registry::{InherentModule, ScenarioName};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("{0} must be a single line")]
    Multiline(&'static str),
    #[error("{0} must not start or end with whitespace")]
    Untrimmed(&'static str),
    #[error("module `{0}` has no elements")]
    EmptyModule(String),
    #[error("duplicate module `{0}`")]
    DuplicateModule(String),
    #[error("`{0}` is not an inherent module")]
    NotInherent(String),
    #[error("extension module `{0}` uses the name of inherent module `{1}`")]
    ShadowsInherent(String, &'static str),
    #[error("procedure `{0}` has no actions")]
    EmptyProcedure(String),
    #[error("assignment text `{0}` does not match its property and value")]
    AssignmentMismatch(String),
    #[error("freeform text `{0}` has the assignment form")]
    FreeformIsAssignment(String),
    #[error("procedure input property `{0}` must not contain \" of \"")]
    AmbiguousInput(String),
    #[error("element after procedure `{0}` starts with \"Return \" and would be read as its result")]
    AmbiguousReturn(String),
}

/// Validates a single-line, trimmed, non-empty text field.
pub(crate) fn check_line(field: &'static str, text: &str) -> Result<(), ModelError> {
    if text.is_empty() {
        return Err(ModelError::Empty(field));
    }
    if text.contains(['\n', '\r']) {
        return Err(ModelError::Multiline(field));
    }
    if text.trim() != text {
        return Err(ModelError::Untrimmed(field));
    }
    Ok(())
}

/// A 1-based source location with a length in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl Span {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        assert!(line >= 1 && column >= 1, "span positions are 1-based");
        Span { line, column, length }
    }

    /// Moves the span `chars` characters to the right on the same line.
    pub fn shifted(self, chars: usize) -> Self {
        Span { column: self.column + chars, ..self }
    }
}

impl Default for Span {
    fn default() -> Self {
        Span::new(1, 1, 0)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModuleKind {
    Inherent,
    Extension,
}

/// Canonical module identity. Extension names compare case-insensitively.
#[derive(Debug, Clone, Eq)]
pub enum ModuleName {
    Inherent(InherentModule),
    Extension(String),
}

impl ModuleName {
    /// Resolves a heading: inherent names and aliases map to the inherent
    /// module, anything else is an extension.
    pub fn resolve(name: &str) -> Result<Self, ModelError> {
        let name = name.trim();
        check_line("module name", name)?;
        Ok(match InherentModule::from_name(name) {
            Some(m) => ModuleName::Inherent(m),
            None => ModuleName::Extension(name.to_string()),
        })
    }

    pub fn as_str(&self) -> &str {
        match self {
            ModuleName::Inherent(m) => m.name(),
            ModuleName::Extension(s) => s,
        }
    }

    pub fn kind(&self) -> ModuleKind {
        match self {
            ModuleName::Inherent(_) => ModuleKind::Inherent,
            ModuleName::Extension(_) => ModuleKind::Extension,
        }
    }

    pub fn matches(&self, name: &str) -> bool {
        ModuleName::resolve(name).is_ok_and(|other| &other == self)
    }
}

impl PartialEq for ModuleName {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (ModuleName::Inherent(a), ModuleName::Inherent(b)) => a == b,
            (ModuleName::Extension(a), ModuleName::Extension(b)) => a.eq_ignore_ascii_case(b),
            _ => false,
        }
    }
}

impl fmt::Display for ModuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcedureInput {
    property: String,
    value: String,
}

impl ProcedureInput {
    pub fn new(property: impl Into<String>, value: impl Into<String>) -> Result<Self, ModelError> {
        let (property, value) = (property.into(), value.into());
        check_line("procedure input property", &property)?;
        check_line("procedure input value", &value)?;
        // the lead clause is split at the first " of "
        if format!(" {property} ").contains(" of ") {
            return Err(ModelError::AmbiguousInput(property));
        }
        Ok(ProcedureInput { property, value })
    }

    pub fn property(&self) -> &str {
        &self.property
    }

    pub fn value(&self) -> &str {
        &self.value
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    name: String,
    input: Option<ProcedureInput>,
    actions: Vec<String>,
    result: Option<String>,
}

impl Procedure {
    pub fn new(
        name: impl Into<String>,
        input: Option<ProcedureInput>,
        actions: Vec<String>,
        result: Option<String>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        check_line("procedure name", &name)?;
        if actions.is_empty() {
            return Err(ModelError::EmptyProcedure(name));
        }
        for a in &actions {
            check_line("procedure action", a)?;
        }
        if let Some(r) = &result {
            check_line("procedure result", r)?;
        }
        Ok(Procedure { name, input, actions, result })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn input(&self) -> Option<&ProcedureInput> {
        self.input.as_ref()
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn result(&self) -> Option<&str> {
        self.result.as_deref()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Element {
    Assignment { property: String, value: String, text: String },
    Freeform { text: String },
    Procedure(Procedure),
}

impl Element {
    /// Builds an assignment, checking that `text` classifies to exactly this
    /// property and value.
    pub fn assignment(
        property: impl Into<String>,
        value: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let (property, value, text) = (property.into(), value.into(), text.into());
        check_line("element text", &text)?;
        match split_assignment(&text) {
            Some((p, v)) if p == property && v == value => Ok(Element::Assignment { property, value, text }),
            _ => Err(ModelError::AssignmentMismatch(text)),
        }
    }

    /// Builds a freeform element. Text in the assignment form is rejected so
    /// that every element is what [`classify_element_line`] would produce.
    pub fn freeform(text: impl Into<String>) -> Result<Self, ModelError> {
        let text = text.into();
        check_line("element text", &text)?;
        if split_assignment(&text).is_some() {
            return Err(ModelError::FreeformIsAssignment(text));
        }
        Ok(Element::Freeform { text })
    }

    /// The bullet text of an assignment or freeform element.
    pub fn text(&self) -> Option<&str> {
        match self {
            Element::Assignment { text, .. } | Element::Freeform { text } => Some(text),
            Element::Procedure(_) => None,
        }
    }

    pub fn as_procedure(&self) -> Option<&Procedure> {
        match self {
            Element::Procedure(p) => Some(p),
            _ => None,
        }
    }
}

fn split_assignment(text: &str) -> Option<(&str, &str)> {
    let rest = text.strip_prefix("The ")?;
    let idx = rest.find(" is ")?;
    let property = &rest[..idx];
    let value = &rest[idx + 4..];
    let value = value.strip_suffix('.').unwrap_or(value);
    (!property.is_empty() && !value.is_empty()).then_some((property, value))
}

/// Classifies one element line as an assignment (`The <property> is
/// <value>.`) or freeform text. The trimmed text is kept verbatim.
pub fn classify_element_line(text: &str) -> Result<Element, ModelError> {
    let text = text.trim();
    check_line("element text", text)?;
    Ok(match split_assignment(text) {
        Some((property, value)) => {
            Element::Assignment { property: property.to_string(), value: value.to_string(), text: text.to_string() }
        }
        None => Element::Freeform { text: text.to_string() },
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleInstance {
    name: ModuleName,
    elements: Vec<Element>,
}

impl ModuleInstance {
    pub fn new(name: ModuleName, elements: Vec<Element>) -> Result<Self, ModelError> {
        if let ModuleName::Extension(ext) = &name {
            check_line("module name", ext)?;
            if let Some(m) = InherentModule::from_name(ext) {
                return Err(ModelError::ShadowsInherent(ext.clone(), m.name()));
            }
        }
        if elements.is_empty() {
            return Err(ModelError::EmptyModule(name.to_string()));
        }
        for pair in elements.windows(2) {
            if let (Element::Procedure(p), Some(text)) = (&pair[0], pair[1].text()) {
                if p.result.is_none() && text.starts_with("Return ") {
                    return Err(ModelError::AmbiguousReturn(p.name.clone()));
                }
            }
        }
        Ok(ModuleInstance { name, elements })
    }

    pub fn inherent(module: InherentModule, elements: Vec<Element>) -> Result<Self, ModelError> {
        Self::new(ModuleName::Inherent(module), elements)
    }

    pub fn extension(name: impl Into<String>, elements: Vec<Element>) -> Result<Self, ModelError> {
        Self::new(ModuleName::Extension(name.into()), elements)
    }

    /// Builds a module of an explicit kind; inherent names may be aliases.
    pub fn with_kind(kind: ModuleKind, name: &str, elements: Vec<Element>) -> Result<Self, ModelError> {
        let name = match kind {
            ModuleKind::Inherent => ModuleName::Inherent(
                InherentModule::from_name(name).ok_or_else(|| ModelError::NotInherent(name.to_string()))?,
            ),
            ModuleKind::Extension => ModuleName::Extension(name.to_string()),
        };
        Self::new(name, elements)
    }

    pub fn kind(&self) -> ModuleKind {
        self.name.kind()
    }

    pub fn name(&self) -> &ModuleName {
        &self.name
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptDocument {
    name: String,
    scenario: Option<ScenarioName>,
    extends: Option<String>,
    modules: Vec<ModuleInstance>,
}

impl PromptDocument {
    /// A document with no modules is accepted; the parser reports it as an
    /// empty body unless `extends` is set.
    pub fn new(
        name: impl Into<String>,
        scenario: Option<ScenarioName>,
        extends: Option<String>,
        modules: Vec<ModuleInstance>,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        check_line("document name", &name)?;
        if let Some(e) = &extends {
            check_line("extends reference", e)?;
        }
        for (i, m) in modules.iter().enumerate() {
            if modules[..i].iter().any(|prev| prev.name == m.name) {
                return Err(ModelError::DuplicateModule(m.name.to_string()));
            }
        }
        Ok(PromptDocument { name, scenario, extends, modules })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scenario(&self) -> Option<&ScenarioName> {
        self.scenario.as_ref()
    }

    pub fn extends(&self) -> Option<&str> {
        self.extends.as_deref()
    }

    pub fn modules(&self) -> &[ModuleInstance] {
        &self.modules
    }

    /// Looks a module up by canonical name, alias or extension name.
    pub fn module(&self, name: &str) -> Option<&ModuleInstance> {
        let name = ModuleName::resolve(name).ok()?;
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn with_modules(&self, modules: Vec<ModuleInstance>) -> Result<Self, ModelError> {
        Self::new(self.name.clone(), self.scenario.clone(), self.extends.clone(), modules)
    }

    pub fn with_extends(&self, extends: Option<String>) -> Result<Self, ModelError> {
        Self::new(self.name.clone(), self.scenario.clone(), extends, self.modules.clone())
    }
}

/// Addresses one text field of an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElementPart {
    /// Bullet text of an assignment or freeform element.
    Text,
    ProcedureName,
    InputProperty,
    InputValue,
    Action(usize),
    Result,
}

impl Element {
    /// Every text field of the element with its address, in rendering order.
    pub fn parts(&self) -> Vec<(ElementPart, &str)> {
        match self {
            Element::Assignment { text, .. } | Element::Freeform { text } => vec![(ElementPart::Text, text.as_str())],
            Element::Procedure(p) => {
                let mut out = vec![(ElementPart::ProcedureName, p.name.as_str())];
                if let Some(input) = &p.input {
                    out.push((ElementPart::InputProperty, input.property.as_str()));
                    out.push((ElementPart::InputValue, input.value.as_str()));
                }
                out.extend(p.actions.iter().enumerate().map(|(i, a)| (ElementPart::Action(i), a.as_str())));
                if let Some(r) = &p.result {
                    out.push((ElementPart::Result, r.as_str()));
                }
                out
            }
        }
    }
}

/// A placeholder token found by [`scan_placeholders`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlaceholderToken {
    pub name: String,
    /// Character span on line 1 of the scanned text, covering `<NAME>`.
    pub span: Span,
}

pub fn is_placeholder_name(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

/// A token or escape found while walking a line.
enum Piece<'a> {
    Literal(&'a str),
    Escape,
    Placeholder { name: &'a str, column: usize },
}

/// Walks `text`, yielding literals, `\<` escapes and `<NAME>` tokens.
fn pieces(text: &str) -> Vec<Piece<'_>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut literal_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'\\' if bytes.get(i + 1) == Some(&b'<') => {
                out.push(Piece::Literal(&text[literal_start..i]));
                out.push(Piece::Escape);
                i += 2;
                literal_start = i;
            }
            b'<' => {
                let start = i + 1;
                let mut end = start;
                if bytes.get(end).is_some_and(u8::is_ascii_uppercase) {
                    end += 1;
                    while bytes.get(end).is_some_and(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || *b == b'_') {
                        end += 1;
                    }
                    if bytes.get(end) == Some(&b'>') {
                        out.push(Piece::Literal(&text[literal_start..i]));
                        out.push(Piece::Placeholder { name: &text[start..end], column: text[..i].chars().count() + 1 });
                        i = end + 1;
                        literal_start = i;
                        continue;
                    }
                }
                i += 1;
            }
            _ => i += 1,
        }
    }
    out.push(Piece::Literal(&text[literal_start..]));
    out
}

/// Finds every `<NAME>` token (NAME matching `[A-Z][A-Z0-9_]*`) in text
/// order, skipping tokens escaped as `\<NAME>`.
pub fn scan_placeholders(text: &str) -> Vec<PlaceholderToken> {
    pieces(text)
        .into_iter()
        .filter_map(|p| match p {
            Piece::Placeholder { name, column } => {
                Some(PlaceholderToken { name: name.to_string(), span: Span::new(1, column, name.chars().count() + 2) })
            }
            _ => None,
        })
        .collect()
}

/// Replaces placeholders for which `lookup` returns a value; escapes and
/// unbound tokens are kept as written.
pub fn substitute_placeholders<'a>(text: &str, lookup: impl Fn(&str) -> Option<&'a str>) -> String {
    let mut out = String::with_capacity(text.len());
    for piece in pieces(text) {
        match piece {
            Piece::Literal(s) => out.push_str(s),
            Piece::Escape => out.push_str("\\<"),
            Piece::Placeholder { name, .. } => match lookup(name) {
                Some(value) => out.push_str(value),
                None => {
                    out.push('<');
                    out.push_str(name);
                    out.push('>');
                }
            },
        }
    }
    out
}

/// Like [`substitute_placeholders`] but also turns `\<` escapes into `<`.
pub(crate) fn substitute_and_unescape<'a>(text: &str, lookup: impl Fn(&str) -> Option<&'a str>) -> String {
    let mut out = String::with_capacity(text.len());
    for piece in pieces(text) {
        match piece {
            Piece::Literal(s) => out.push_str(s),
            Piece::Escape => out.push('<'),
            Piece::Placeholder { name, .. } => match lookup(name) {
                Some(value) => out.push_str(value),
                None => {
                    out.push('<');
                    out.push_str(name);
                    out.push('>');
                }
            },
        }
    }
    out
}
