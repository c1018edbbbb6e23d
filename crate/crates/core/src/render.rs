//! Canonical emitters: Markdown dialect, JSON, and flat prompt text.

use serde::Serialize;
use thiserror::Error;

use crate::model::{
    scan_placeholders, substitute_and_unescape, Element, ElementPart, ModuleInstance, ModuleKind, ModuleName,
    ProcedureInput, PromptDocument, Span,
};
use crate::parser::{ElementSpans, ModuleSpans, SourceMap, TextSpan, LEAD_PREFIX, LEAD_SUFFIX};
use crate::registry::ScenarioMatrix;
use crate::template::{list_placeholders, Placeholder, TemplateBindings};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModuleOrder {
    #[default]
    Source,
    /// Inherent modules in matrix column order, then registered extensions
    /// in registration order, then unregistered extensions in source order.
    Canonical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RenderTarget {
    #[default]
    Markdown,
    Json,
    Flat,
}

#[derive(Debug, Clone, Default)]
pub struct RenderOptions {
    pub target: RenderTarget,
    pub module_order: ModuleOrder,
    /// Used by [`RenderTarget::Flat`] only.
    pub bindings: TemplateBindings,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("unbound placeholders: {}", names(.0))]
    UnboundPlaceholder(Vec<Placeholder>),
}

fn names(ps: &[Placeholder]) -> String {
    ps.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", ")
}

/// Sort key for canonical module order.
pub(crate) fn canonical_key(module: &ModuleInstance, source_index: usize, matrix: &ScenarioMatrix) -> (u8, usize) {
    match module.name() {
        ModuleName::Inherent(m) => (0, m.column()),
        ModuleName::Extension(name) => match matrix.extension_position(name) {
            Some(pos) => (1, pos),
            None => (2, source_index),
        },
    }
}

/// Returns `doc` with its modules in the requested order.
pub fn reorder(doc: &PromptDocument, order: ModuleOrder, matrix: &ScenarioMatrix) -> PromptDocument {
    match order {
        ModuleOrder::Source => doc.clone(),
        ModuleOrder::Canonical => {
            let mut modules: Vec<_> = doc.modules().iter().enumerate().collect();
            modules.sort_by_key(|(i, m)| canonical_key(m, *i, matrix));
            doc.with_modules(modules.into_iter().map(|(_, m)| m.clone()).collect())
                .expect("reordering keeps module names unique")
        }
    }
}

/// The canonical lead bullet text for a procedure input.
pub fn lead_text(input: &ProcedureInput) -> String {
    let (property, value) = (input.property(), input.value());
    let tokens = scan_placeholders(value);
    let lone_placeholder =
        tokens.len() == 1 && tokens[0].span.column == 1 && tokens[0].span.length == value.chars().count();
    if lone_placeholder {
        format!("{LEAD_PREFIX}{property} {value}{LEAD_SUFFIX}")
    } else {
        format!("{LEAD_PREFIX}{property} of {value}{LEAD_SUFFIX}")
    }
}

#[derive(Default)]
struct Lines {
    lines: Vec<String>,
}

impl Lines {
    /// Pushes a line and returns the span of `text` within it.
    fn push(&mut self, prefix: &str, text: &str) -> TextSpan {
        self.lines.push(format!("{prefix}{text}"));
        let span = Span::new(self.lines.len(), prefix.chars().count() + 1, text.chars().count());
        TextSpan::exact(span)
    }

    fn blank(&mut self) {
        self.lines.push(String::new());
    }

    fn finish(self) -> String {
        let mut out = self.lines.join("\n");
        out.push('\n');
        out
    }
}

/// Renders the Markdown dialect and the source map of the rendered text.
pub fn render_markdown_mapped(doc: &PromptDocument) -> (String, SourceMap) {
    let mut out = Lines::default();
    let title = out.push("# ", doc.name()).span;
    let scenario = doc.scenario().map(|s| out.push("", &format!("Scenario: {s}")).span);
    let extends = doc.extends().map(|e| out.push("", &format!("Extends: {e}")).span);
    let mut map = SourceMap { title, scenario, extends, modules: Vec::new() };
    for module in doc.modules() {
        out.blank();
        let heading = out.push("## ", module.name().as_str()).span;
        let mut spans = Vec::new();
        let mut after_procedure = false;
        for (i, element) in module.elements().iter().enumerate() {
            match element {
                Element::Assignment { text, .. } | Element::Freeform { text } => {
                    if after_procedure {
                        out.blank();
                    }
                    let ts = out.push("- ", text);
                    spans.push(ElementSpans {
                        span: Span::new(ts.span.line, 1, ts.span.length + 2),
                        parts: vec![(ElementPart::Text, ts)],
                    });
                    after_procedure = false;
                }
                Element::Procedure(p) => {
                    if i > 0 {
                        out.blank();
                    }
                    let name = out.push("### ", p.name());
                    let mut parts = vec![(ElementPart::ProcedureName, name)];
                    if let Some(input) = p.input() {
                        let lead = lead_text(input);
                        let ts = out.push("- ", &lead);
                        let prop_offset = LEAD_PREFIX.chars().count();
                        let value_offset =
                            lead.chars().count() - LEAD_SUFFIX.chars().count() - input.value().chars().count();
                        parts.push((
                            ElementPart::InputProperty,
                            TextSpan::exact(ts.sub(prop_offset, input.property().chars().count())),
                        ));
                        parts.push((
                            ElementPart::InputValue,
                            TextSpan::exact(ts.sub(value_offset, input.value().chars().count())),
                        ));
                    }
                    for (k, action) in p.actions().iter().enumerate() {
                        parts.push((ElementPart::Action(k), out.push("  - ", action)));
                    }
                    if let Some(result) = p.result() {
                        parts.push((ElementPart::Result, out.push("- Return ", result)));
                    }
                    spans.push(ElementSpans { span: Span::new(name.span.line, 1, name.span.length + 4), parts });
                    after_procedure = true;
                }
            }
        }
        map.modules.push(ModuleSpans { heading: Span::new(heading.line, 1, heading.length + 3), elements: spans });
    }
    (out.finish(), map)
}

/// Canonical Markdown: `# name`, header lines, a blank line before each
/// module and procedure, two-space indented actions, one trailing newline.
pub fn render_markdown(doc: &PromptDocument) -> String {
    render_markdown_mapped(doc).0
}

#[derive(Serialize)]
struct DocRepr<'a> {
    name: &'a str,
    scenario: Option<&'a str>,
    extends: Option<&'a str>,
    modules: Vec<ModuleRepr<'a>>,
}

#[derive(Serialize)]
struct ModuleRepr<'a> {
    kind: &'static str,
    name: &'a str,
    elements: Vec<ElementRepr<'a>>,
}

#[derive(Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum ElementRepr<'a> {
    Assignment {
        property: &'a str,
        value: &'a str,
        text: &'a str,
    },
    Freeform {
        text: &'a str,
    },
    Procedure {
        #[serde(rename = "procedureName")]
        procedure_name: &'a str,
        input: Option<InputRepr<'a>>,
        actions: &'a [String],
        result: Option<&'a str>,
    },
}

#[derive(Serialize)]
struct InputRepr<'a> {
    property: &'a str,
    value: &'a str,
}

/// Pretty-printed JSON (two-space indent) with a fixed key order and a
/// trailing newline.
pub fn render_json(doc: &PromptDocument) -> String {
    let repr = DocRepr {
        name: doc.name(),
        scenario: doc.scenario().map(|s| s.as_str()),
        extends: doc.extends(),
        modules: doc
            .modules()
            .iter()
            .map(|m| ModuleRepr {
                kind: match m.kind() {
                    ModuleKind::Inherent => "inherent",
                    ModuleKind::Extension => "extension",
                },
                name: m.name().as_str(),
                elements: m
                    .elements()
                    .iter()
                    .map(|e| match e {
                        Element::Assignment { property, value, text } => {
                            ElementRepr::Assignment { property, value, text }
                        }
                        Element::Freeform { text } => ElementRepr::Freeform { text },
                        Element::Procedure(p) => ElementRepr::Procedure {
                            procedure_name: p.name(),
                            input: p.input().map(|i| InputRepr { property: i.property(), value: i.value() }),
                            actions: p.actions(),
                            result: p.result(),
                        },
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&repr).expect("document serialization cannot fail");
    out.push('\n');
    out
}

/// Canonical Markdown with every placeholder replaced by its binding and
/// `\<` escapes turned into `<`.
pub fn render_flat(doc: &PromptDocument, bindings: &TemplateBindings) -> Result<String, RenderError> {
    let unbound: Vec<Placeholder> =
        list_placeholders(doc).into_iter().filter(|p| bindings.get(&p.name).is_none()).collect();
    if !unbound.is_empty() {
        return Err(RenderError::UnboundPlaceholder(unbound));
    }
    let markdown = render_markdown(doc);
    Ok(substitute_and_unescape(&markdown, |name| bindings.get(name)))
}

pub fn render(doc: &PromptDocument, options: &RenderOptions, matrix: &ScenarioMatrix) -> Result<String, RenderError> {
    let doc = reorder(doc, options.module_order, matrix);
    match options.target {
        RenderTarget::Markdown => Ok(render_markdown(&doc)),
        RenderTarget::Json => Ok(render_json(&doc)),
        RenderTarget::Flat => render_flat(&doc, &options.bindings),
    }
}
