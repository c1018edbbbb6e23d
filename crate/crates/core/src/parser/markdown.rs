//! Line-oriented parser for the Markdown dialect.
//!
//! ```text
//! # <name>
//! Scenario: <scenario>          (optional header lines)
//! Extends: <reference>
//!
//! ## <Module>
//! - <element line>
//! ### <Procedure>
//! - For the given <property> of <value>, please execute the following actions:
//!   - <action>
//! - Return <result>
//! ```
//!
//! Blank lines are ignored. Any other line is reported and parsing goes on,
//! so one pass surfaces every independent problem.

use crate::diagnostic::Diagnostic;
use crate::model::{
    classify_element_line, scan_placeholders, Element, ElementPart, ModelError, ModuleInstance, ModuleName, Procedure,
    ProcedureInput, PromptDocument, Span,
};
use crate::registry::ScenarioName;
use crate::rules;

use super::{ElementSpans, ModuleSpans, ParseResult, SourceMap, TextSpan};

pub const LEAD_PREFIX: &str = "For the given ";
pub const LEAD_SUFFIX: &str = ", please execute the following actions:";
const RETURN_PREFIX: &str = "Return ";

/// Splits the clause of a procedure lead bullet into property and value.
///
/// `<property> of <value>` splits at the first " of "; without " of ", a
/// trailing lone placeholder is the value (`article <ARTICLE>`).
pub fn parse_lead_clause(clause: &str) -> Option<(&str, &str)> {
    if let Some(idx) = clause.find(" of ") {
        let (property, value) = (clause[..idx].trim(), clause[idx + 4..].trim());
        return (!property.is_empty() && !value.is_empty()).then_some((property, value));
    }
    let (property, value) = clause.rsplit_once(' ')?;
    let property = property.trim();
    let tokens = scan_placeholders(value);
    let lone = tokens.len() == 1 && tokens[0].span.column == 1 && tokens[0].span.length == value.chars().count();
    (lone && !property.is_empty()).then_some((property, value))
}

fn chars(s: &str) -> usize {
    s.chars().count()
}

struct Line<'a> {
    number: usize,
    indent: usize,
    /// Text after the leading spaces, trailing whitespace removed.
    content: &'a str,
}

impl Line<'_> {
    fn span(&self) -> Span {
        Span::new(self.number, self.indent + 1, chars(self.content))
    }

    /// Span of the text following a one-character marker (`-`, `#`, `##`...).
    fn text_after(&self, marker_len: usize) -> (&str, TextSpan) {
        let rest = &self.content[marker_len..];
        let text = rest.trim();
        let offset = marker_len + chars(rest) - chars(rest.trim_start());
        let span = Span::new(self.number, self.indent + 1 + offset, chars(text));
        (text, TextSpan::exact(span))
    }
}

struct ProcBuilder {
    heading: Span,
    name: String,
    name_span: TextSpan,
    lead_seen: bool,
    input: Option<(ProcedureInput, TextSpan, TextSpan)>,
    actions: Vec<(String, TextSpan)>,
    result: Option<(String, TextSpan)>,
    broken: bool,
}

impl ProcBuilder {
    fn is_fresh(&self) -> bool {
        !self.lead_seen && self.actions.is_empty() && self.result.is_none()
    }
}

struct ModuleBuilder {
    /// `None` when the heading was rejected; content is still parsed.
    name: Option<ModuleName>,
    heading: Span,
    elements: Vec<(Element, ElementSpans)>,
    proc_: Option<ProcBuilder>,
    saw_content: bool,
    broken: bool,
}

#[derive(Default)]
struct Parser {
    diags: Vec<Diagnostic>,
    title: Option<(String, Span)>,
    scenario: Option<(ScenarioName, Span)>,
    extends: Option<(String, Span)>,
    modules: Vec<(ModuleInstance, ModuleSpans)>,
    seen_modules: Vec<ModuleName>,
    current: Option<ModuleBuilder>,
    any_module: bool,
}

impl Parser {
    fn stray(&mut self, span: Span, message: impl Into<String>) {
        self.diags.push(Diagnostic::error(rules::STRAY_TEXT, span, message));
    }

    fn line(&mut self, line: &Line<'_>) {
        let content = line.content;
        if line.indent == 0 && (content == "##" || content.starts_with("## ")) {
            self.close_module();
            self.open_module(line);
        } else if line.indent == 0 && (content == "###" || content.starts_with("### ")) {
            self.open_procedure(line);
        } else if line.indent == 0 && content.starts_with('#') {
            self.stray(line.span(), "unexpected heading; only `##` modules and `###` procedures follow the title");
        } else if content.starts_with('\t') {
            self.stray(line.span(), "indent with spaces, not tabs");
        } else if content == "-" || content.starts_with("- ") {
            self.bullet(line);
        } else if line.indent > 0 || self.any_module || !self.header(line) {
            if let Some(m) = self.current.as_mut() {
                m.saw_content = true;
            }
            self.stray(line.span(), "text outside a bullet or heading");
        }
    }

    /// Handles `Scenario:` / `Extends:` lines; returns false for anything else.
    fn header(&mut self, line: &Line<'_>) -> bool {
        let (key, value) = match line.content.split_once(':') {
            Some((k @ ("Scenario" | "Extends"), v)) => (k, v.trim()),
            _ => return false,
        };
        let value_span = Span::new(line.number, 1, chars(line.content));
        let duplicate = match key {
            "Scenario" => self.scenario.is_some(),
            _ => self.extends.is_some(),
        };
        if duplicate {
            self.stray(value_span, format!("duplicate `{key}:` header"));
        } else if value.is_empty() {
            self.stray(value_span, format!("`{key}:` header has no value"));
        } else if key == "Scenario" {
            match ScenarioName::parse(value) {
                Ok(s) => self.scenario = Some((s, value_span)),
                Err(e) => self.stray(value_span, e.to_string()),
            }
        } else {
            self.extends = Some((value.to_string(), value_span));
        }
        true
    }

    fn open_module(&mut self, line: &Line<'_>) {
        self.any_module = true;
        let (text, _) = line.text_after(2);
        let heading = line.span();
        let name = match ModuleName::resolve(text) {
            Ok(name) if self.seen_modules.contains(&name) => {
                self.diags.push(Diagnostic::error(
                    rules::DUP_MODULE,
                    heading,
                    format!("module `{name}` appears more than once"),
                ));
                None
            }
            Ok(name) => {
                self.seen_modules.push(name.clone());
                Some(name)
            }
            Err(_) => {
                self.stray(heading, "module heading has no name");
                None
            }
        };
        self.current =
            Some(ModuleBuilder { name, heading, elements: Vec::new(), proc_: None, saw_content: false, broken: false });
    }

    fn open_procedure(&mut self, line: &Line<'_>) {
        let Some(module) = self.current.as_mut() else {
            self.stray(line.span(), "procedure heading outside a module");
            return;
        };
        module.saw_content = true;
        self.close_procedure();
        let (name, name_span) = line.text_after(3);
        let broken = name.is_empty();
        if broken {
            self.stray(line.span(), "procedure heading has no name");
        }
        let module = self.current.as_mut().expect("checked above");
        module.proc_ = Some(ProcBuilder {
            heading: line.span(),
            name: name.to_string(),
            name_span,
            lead_seen: false,
            input: None,
            actions: Vec::new(),
            result: None,
            broken,
        });
    }

    fn bullet(&mut self, line: &Line<'_>) {
        let (text, text_span) = line.text_after(1);
        if text.is_empty() {
            self.stray(line.span(), "empty bullet");
            return;
        }
        let Some(module) = self.current.as_mut() else {
            self.stray(line.span(), "bullet outside a module");
            return;
        };
        module.saw_content = true;
        match line.indent {
            0 => self.top_level_bullet(line, text, text_span),
            1 => self.stray(line.span(), "nested bullets are indented by at least two spaces"),
            _ => {
                let module = self.current.as_mut().expect("checked above");
                match module.proc_.as_mut() {
                    Some(p) if p.result.is_none() => p.actions.push((text.to_string(), text_span)),
                    Some(_) => self.stray(line.span(), "action after the procedure's `Return` bullet"),
                    None => self.stray(line.span(), "nested bullet outside a procedure"),
                }
            }
        }
    }

    fn top_level_bullet(&mut self, line: &Line<'_>, text: &str, text_span: TextSpan) {
        let module = self.current.as_mut().expect("caller checked");
        if let Some(p) = module.proc_.as_mut() {
            if p.is_fresh() && text.starts_with(LEAD_PREFIX) && text.ends_with(':') {
                p.lead_seen = true;
                let clause = text
                    .strip_prefix(LEAD_PREFIX)
                    .and_then(|c| c.strip_suffix(LEAD_SUFFIX))
                    .and_then(parse_lead_clause);
                let input = clause.and_then(|(prop, value)| {
                    let prop_offset = chars(LEAD_PREFIX);
                    // `value` is a subslice of `text`
                    let value_offset = chars(&text[..value.as_ptr() as usize - text.as_ptr() as usize]);
                    let input = ProcedureInput::new(prop, value).ok()?;
                    Some((
                        input,
                        TextSpan::exact(text_span.sub(prop_offset, chars(prop))),
                        TextSpan::exact(text_span.sub(value_offset, chars(value))),
                    ))
                });
                match input {
                    Some(input) => p.input = Some(input),
                    None => {
                        p.broken = true;
                        self.stray(
                            line.span(),
                            format!(
                                "malformed procedure lead; expected `{LEAD_PREFIX}<property> of <value>{LEAD_SUFFIX}`"
                            ),
                        );
                    }
                }
                return;
            }
            if p.result.is_none() {
                if let Some(result) = text.strip_prefix(RETURN_PREFIX) {
                    let result = result.trim_start();
                    let offset = chars(text) - chars(result);
                    p.result = Some((result.to_string(), TextSpan::exact(text_span.sub(offset, chars(result)))));
                    if p.actions.is_empty() {
                        p.broken = true;
                        self.diags.push(Diagnostic::error(
                            rules::EMPTY_PROC,
                            line.span(),
                            format!("`Return` bullet before any action in procedure `{}`", p.name),
                        ));
                    }
                    return;
                }
            }
            self.close_procedure();
        }
        let element = classify_element_line(text).expect("bullet text is trimmed and non-empty");
        let spans = ElementSpans { span: line.span(), parts: vec![(ElementPart::Text, text_span)] };
        self.current.as_mut().expect("caller checked").elements.push((element, spans));
    }

    fn close_procedure(&mut self) {
        let Some(module) = self.current.as_mut() else { return };
        let Some(p) = module.proc_.take() else { return };
        if p.actions.is_empty() {
            if p.result.is_none() {
                self.diags.push(Diagnostic::error(
                    rules::EMPTY_PROC,
                    p.heading,
                    format!("procedure `{}` has no actions", p.name),
                ));
            }
            module.broken = true;
            return;
        }
        if p.broken {
            module.broken = true;
            return;
        }
        let mut parts = vec![(ElementPart::ProcedureName, p.name_span)];
        let input = p.input.map(|(input, prop, value)| {
            parts.push((ElementPart::InputProperty, prop));
            parts.push((ElementPart::InputValue, value));
            input
        });
        let mut actions = Vec::with_capacity(p.actions.len());
        for (i, (text, span)) in p.actions.into_iter().enumerate() {
            parts.push((ElementPart::Action(i), span));
            actions.push(text);
        }
        let result = p.result.map(|(text, span)| {
            parts.push((ElementPart::Result, span));
            text
        });
        match Procedure::new(p.name, input, actions, result) {
            Ok(proc_) => module.elements.push((Element::Procedure(proc_), ElementSpans { span: p.heading, parts })),
            Err(e) => {
                module.broken = true;
                self.stray(p.heading, e.to_string());
            }
        }
    }

    fn close_module(&mut self) {
        self.close_procedure();
        let Some(m) = self.current.take() else { return };
        if m.elements.is_empty() {
            // content that failed to parse has been reported already
            if !m.saw_content {
                self.diags.push(Diagnostic::error(
                    rules::EMPTY_MODULE,
                    m.heading,
                    format!("module `{}` has no elements", m.name.as_ref().map_or("?", |n| n.as_str())),
                ));
            }
            return;
        }
        let (Some(name), false) = (m.name, m.broken) else { return };
        let (elements, spans): (Vec<_>, Vec<_>) = m.elements.into_iter().unzip();
        match ModuleInstance::new(name, elements) {
            Ok(module) => self.modules.push((module, ModuleSpans { heading: m.heading, elements: spans })),
            Err(e) => self.stray(m.heading, e.to_string()),
        }
    }

    fn finish(mut self) -> ParseResult {
        self.close_module();
        let Some((name, title_span)) = self.title.take() else {
            return ParseResult::finish(None, SourceMap::default(), self.diags);
        };
        if self.modules.is_empty() && self.extends.is_none() && self.seen_modules.is_empty() {
            self.diags.push(Diagnostic::warning(
                rules::EMPTY_BODY,
                title_span,
                "document has no modules and no `Extends:` base",
            ));
        }
        let mut map = SourceMap {
            title: title_span,
            scenario: self.scenario.as_ref().map(|(_, s)| *s),
            extends: self.extends.as_ref().map(|(_, s)| *s),
            modules: Vec::new(),
        };
        let mut modules = Vec::with_capacity(self.modules.len());
        for (module, spans) in self.modules {
            modules.push(module);
            map.modules.push(spans);
        }
        let document = PromptDocument::new(name, self.scenario.map(|(s, _)| s), self.extends.map(|(e, _)| e), modules);
        let document = match document {
            Ok(doc) => Some(doc),
            Err(e @ ModelError::DuplicateModule(_)) => {
                self.diags.push(Diagnostic::error(rules::DUP_MODULE, title_span, e.to_string()));
                None
            }
            Err(e) => {
                self.diags.push(Diagnostic::error(rules::STRAY_TEXT, title_span, e.to_string()));
                None
            }
        };
        ParseResult::finish(document, map, self.diags)
    }
}

/// Parses the Markdown dialect. `\r\n` line endings are accepted.
pub fn parse_markdown(source: &str) -> ParseResult {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    let mut parser = Parser::default();
    let mut lines = source.split('\n').enumerate().map(|(i, raw)| {
        let raw = raw.strip_suffix('\r').unwrap_or(raw);
        let content = raw.trim_start_matches(' ');
        Line { number: i + 1, indent: raw.len() - content.len(), content: content.trim_end() }
    });

    let mut first = None;
    for line in lines.by_ref() {
        if !line.content.is_empty() {
            first = Some(line);
            break;
        }
    }
    match first {
        Some(line) if line.indent == 0 && line.content.starts_with("# ") && !line.content[2..].trim().is_empty() => {
            let (name, span) = line.text_after(1);
            parser.title = Some((name.to_string(), span.span));
        }
        Some(line) => {
            parser.diags.push(Diagnostic::error(
                rules::NO_TITLE,
                line.span(),
                "document must start with a `# <name>` title line",
            ));
            // structure on the first line is still parsed; prose is covered by the error above
            if line.content.starts_with(['#', '-']) {
                parser.line(&line);
            }
        }
        None => {
            parser.diags.push(Diagnostic::error(rules::NO_TITLE, Span::default(), "document is empty"));
        }
    }
    for line in lines {
        if !line.content.is_empty() {
            parser.line(&line);
        }
    }
    parser.finish()
}
