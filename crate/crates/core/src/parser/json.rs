//! JSON serialization parser.
//!
//! Syntax is checked strictly with `serde_json`; the schema walk runs over
//! the `jsonc-parser` AST, whose node ranges give every diagnostic a source
//! span. Locations in messages use JSON-pointer notation.

use jsonc_parser::ast::{Array, Object, ObjectProp, Value};
use jsonc_parser::common::Ranged;
use jsonc_parser::{CollectOptions, ParseOptions};

use crate::diagnostic::Diagnostic;
use crate::model::{
    Element, ElementPart, ModelError, ModuleInstance, ModuleKind, Procedure, ProcedureInput, PromptDocument, Span,
};
use crate::registry::ScenarioName;
use crate::rules;

use super::{ElementSpans, ModuleSpans, ParseResult, SourceMap, TextSpan};

struct Walker<'s> {
    src: &'s str,
    line_starts: Vec<usize>,
    diags: Vec<Diagnostic>,
}

type Range = jsonc_parser::common::Range;

impl<'s> Walker<'s> {
    fn new(src: &'s str) -> Self {
        let line_starts = std::iter::once(0).chain(src.match_indices('\n').map(|(i, _)| i + 1)).collect();
        Walker { src, line_starts, diags: Vec::new() }
    }

    fn span(&self, range: Range) -> Span {
        let line = self.line_starts.partition_point(|&s| s <= range.start);
        let start = self.line_starts[line - 1];
        let column = self.src[start..range.start].chars().count() + 1;
        let length = self.src[range.start..range.end].chars().count();
        Span::new(line, column, length)
    }

    /// Span inside a string literal; exact when the literal has no escapes.
    fn string_span(&self, range: Range, value: &str) -> TextSpan {
        let raw = &self.src[range.start..range.end];
        let inner = Span { length: value.chars().count(), ..self.span(range).shifted(1) };
        if raw.len() == value.len() + 2 {
            TextSpan::exact(inner)
        } else {
            TextSpan::approximate(inner)
        }
    }

    fn schema(&mut self, range: Range, pointer: &str, message: impl std::fmt::Display) {
        let at = if pointer.is_empty() { "/" } else { pointer };
        self.diags.push(Diagnostic::error(rules::JSON_SCHEMA, self.span(range), format!("{at}: {message}")));
    }

    /// Checks that `value` is an object, warns on unknown keys and rejects
    /// duplicate ones.
    fn object<'a, 'v>(&mut self, value: &'a Value<'v>, pointer: &str, known: &[&str]) -> Option<&'a Object<'v>> {
        let Value::Object(obj) = value else {
            self.schema(value.range(), pointer, "expected an object");
            return None;
        };
        let mut ok = true;
        for (i, prop) in obj.properties.iter().enumerate() {
            let key = prop.name.as_str();
            if obj.properties[..i].iter().any(|p| p.name.as_str() == key) {
                self.schema(prop.range, &format!("{pointer}/{key}"), "duplicate key");
                ok = false;
            } else if !known.contains(&key) {
                self.diags.push(Diagnostic::warning(
                    rules::JSON_UNKNOWN_FIELD,
                    self.span(prop.range),
                    format!("{pointer}/{key}: unknown field ignored"),
                ));
            }
        }
        ok.then_some(obj)
    }

    fn required<'a, 'v>(&mut self, obj: &'a Object<'v>, key: &str, pointer: &str) -> Option<&'a ObjectProp<'v>> {
        let prop = obj.get(key);
        if prop.is_none() {
            self.schema(obj.range, pointer, format!("missing required field `{key}`"));
        }
        prop
    }

    fn string(&mut self, value: &Value<'_>, pointer: &str) -> Option<(String, TextSpan)> {
        match value {
            Value::StringLit(s) => Some((s.value.to_string(), self.string_span(s.range, &s.value))),
            other => {
                self.schema(other.range(), pointer, "expected a string");
                None
            }
        }
    }

    fn required_string(&mut self, obj: &Object<'_>, key: &str, pointer: &str) -> Option<(String, TextSpan)> {
        let prop = self.required(obj, key, pointer)?;
        self.string(&prop.value, &format!("{pointer}/{key}"))
    }

    /// `Ok(None)` for an absent or null field, `Err` after a type error.
    fn nullable_string(
        &mut self,
        obj: &Object<'_>,
        key: &str,
        pointer: &str,
    ) -> Result<Option<(String, TextSpan)>, ()> {
        match obj.get(key).map(|p| &p.value) {
            None | Some(Value::NullKeyword(_)) => Ok(None),
            Some(Value::StringLit(s)) => Ok(Some((s.value.to_string(), self.string_span(s.range, &s.value)))),
            Some(other) => {
                self.schema(other.range(), &format!("{pointer}/{key}"), "expected a string or null");
                Err(())
            }
        }
    }

    fn array<'a, 'v>(&mut self, obj: &'a Object<'v>, key: &str, pointer: &str) -> Option<&'a Array<'v>> {
        let prop = self.required(obj, key, pointer)?;
        match &prop.value {
            Value::Array(a) => Some(a),
            other => {
                self.schema(other.range(), &format!("{pointer}/{key}"), "expected an array");
                None
            }
        }
    }

    fn model<T>(&mut self, result: Result<T, ModelError>, range: Range, pointer: &str) -> Option<T> {
        result.map_err(|e| self.schema(range, pointer, e)).ok()
    }

    fn document(&mut self, value: &Value<'_>) -> Option<(PromptDocument, SourceMap)> {
        let obj = self.object(value, "", &["name", "scenario", "extends", "modules"])?;
        let name = self.required_string(obj, "name", "");
        let scenario = self.nullable_string(obj, "scenario", "");
        let extends = self.nullable_string(obj, "extends", "");
        let modules = self.array(obj, "modules", "");

        let scenario = match scenario {
            Ok(Some((s, span))) => match ScenarioName::parse(&s) {
                Ok(name) => Ok(Some((name, span.span))),
                Err(e) => {
                    self.diags.push(Diagnostic::error(rules::JSON_SCHEMA, span.span, format!("/scenario: {e}")));
                    Err(())
                }
            },
            Ok(None) => Ok(None),
            Err(()) => Err(()),
        };

        let mut map = SourceMap {
            title: name.as_ref().map_or_else(|| self.span(obj.range), |(_, s)| s.span),
            ..SourceMap::default()
        };
        let mut built = Vec::new();
        let mut names = Vec::new();
        let mut ok = true;
        for (i, m) in modules.map(|a| a.elements.as_slice()).unwrap_or_default().iter().enumerate() {
            match self.module(m, &format!("/modules/{i}")) {
                Some((module, spans)) => {
                    if names.contains(module.name()) {
                        self.diags.push(Diagnostic::error(
                            rules::DUP_MODULE,
                            spans.heading,
                            format!("/modules/{i}: module `{}` appears more than once", module.name()),
                        ));
                        ok = false;
                    }
                    names.push(module.name().clone());
                    built.push(module);
                    map.modules.push(spans);
                }
                None => ok = false,
            }
        }
        let (Some((name, name_span)), Ok(scenario), Ok(extends), Some(_), true) =
            (name, scenario, extends, modules, ok)
        else {
            return None;
        };
        map.scenario = scenario.as_ref().map(|(_, s)| *s);
        map.extends = extends.as_ref().map(|(_, s)| s.span);
        let doc = PromptDocument::new(name, scenario.map(|(s, _)| s), extends.map(|(e, _)| e), built);
        let doc = self.model(doc, Range::new(obj.range.start, obj.range.start), "")?;
        if doc.modules().is_empty() && doc.extends().is_none() {
            self.diags.push(Diagnostic::warning(
                rules::EMPTY_BODY,
                name_span.span,
                "document has no modules and no extends base",
            ));
        }
        Some((doc, map))
    }

    fn module(&mut self, value: &Value<'_>, pointer: &str) -> Option<(ModuleInstance, ModuleSpans)> {
        let obj = self.object(value, pointer, &["kind", "name", "elements"])?;
        let kind = match obj.get("kind").map(|p| &p.value) {
            Some(Value::StringLit(s)) if s.value == "inherent" => Some(ModuleKind::Inherent),
            Some(Value::StringLit(s)) if s.value == "extension" => Some(ModuleKind::Extension),
            Some(other) => {
                self.schema(other.range(), &format!("{pointer}/kind"), "expected \"inherent\" or \"extension\"");
                None
            }
            None => {
                self.schema(obj.range, pointer, "missing required field `kind`");
                None
            }
        };
        let name = self.required_string(obj, "name", pointer);
        let elements = self.array(obj, "elements", pointer);
        let heading = name.as_ref().map_or_else(|| self.span(obj.range), |(_, s)| s.span);

        let mut built = Vec::new();
        let mut spans = Vec::new();
        let mut ok = true;
        if let Some(arr) = elements {
            if arr.elements.is_empty() {
                self.diags.push(Diagnostic::error(
                    rules::EMPTY_MODULE,
                    self.span(arr.range),
                    format!("{pointer}/elements: module has no elements"),
                ));
                ok = false;
            }
            for (i, e) in arr.elements.iter().enumerate() {
                match self.element(e, &format!("{pointer}/elements/{i}")) {
                    Some((el, sp)) => {
                        built.push(el);
                        spans.push(sp);
                    }
                    None => ok = false,
                }
            }
        }
        let (Some(kind), Some((name, name_span)), true) = (kind, name, ok) else {
            return None;
        };
        let module = ModuleInstance::with_kind(kind, &name, built);
        let module = self.model(module, obj.range, &format!("{pointer}/name"));
        let _ = name_span;
        Some((module?, ModuleSpans { heading, elements: spans }))
    }

    fn element(&mut self, value: &Value<'_>, pointer: &str) -> Option<(Element, ElementSpans)> {
        let Value::Object(probe) = value else {
            self.schema(value.range(), pointer, "expected an object");
            return None;
        };
        let kind = match probe.get("type").map(|p| &p.value) {
            Some(Value::StringLit(s)) => s.value.to_string(),
            Some(other) => {
                self.schema(other.range(), &format!("{pointer}/type"), "expected a string");
                return None;
            }
            None => {
                self.schema(probe.range, pointer, "missing required field `type`");
                return None;
            }
        };
        let span = self.span(probe.range);
        match kind.as_str() {
            "assignment" => {
                let obj = self.object(value, pointer, &["type", "property", "value", "text"])?;
                let property = self.required_string(obj, "property", pointer);
                let val = self.required_string(obj, "value", pointer);
                let text = self.required_string(obj, "text", pointer);
                let ((property, _), (val, _), (text, text_span)) = (property?, val?, text?);
                let el = self.model(Element::assignment(property, val, text), obj.range, pointer)?;
                Some((el, ElementSpans { span, parts: vec![(ElementPart::Text, text_span)] }))
            }
            "freeform" => {
                let obj = self.object(value, pointer, &["type", "text"])?;
                let (text, text_span) = self.required_string(obj, "text", pointer)?;
                let el = self.model(Element::freeform(text), obj.range, &format!("{pointer}/text"))?;
                Some((el, ElementSpans { span, parts: vec![(ElementPart::Text, text_span)] }))
            }
            "procedure" => {
                let obj = self.object(value, pointer, &["type", "procedureName", "input", "actions", "result"])?;
                self.procedure(obj, pointer, span)
            }
            other => {
                let range = probe.get("type").map_or(probe.range, |p| p.value.range());
                self.schema(
                    range,
                    &format!("{pointer}/type"),
                    format!("unknown element type \"{other}\" (expected assignment, freeform or procedure)"),
                );
                None
            }
        }
    }

    fn procedure(&mut self, obj: &Object<'_>, pointer: &str, span: Span) -> Option<(Element, ElementSpans)> {
        let mut parts = Vec::new();
        let name = self.required_string(obj, "procedureName", pointer);
        let input = match obj.get("input").map(|p| &p.value) {
            None | Some(Value::NullKeyword(_)) => Ok(None),
            Some(v) => {
                let ptr = format!("{pointer}/input");
                match self.object(v, &ptr, &["property", "value"]) {
                    Some(inp) => {
                        let property = self.required_string(inp, "property", &ptr);
                        let value = self.required_string(inp, "value", &ptr);
                        match (property, value) {
                            (Some((p, ps)), Some((v, vs))) => {
                                match self.model(ProcedureInput::new(p, v), inp.range, &ptr) {
                                    Some(input) => Ok(Some((input, ps, vs))),
                                    None => Err(()),
                                }
                            }
                            _ => Err(()),
                        }
                    }
                    None => Err(()),
                }
            }
        };
        let actions = self.array(obj, "actions", pointer);
        let mut action_texts = Vec::new();
        let mut actions_ok = actions.is_some();
        if let Some(arr) = actions {
            if arr.elements.is_empty() {
                self.diags.push(Diagnostic::error(
                    rules::EMPTY_PROC,
                    self.span(arr.range),
                    format!("{pointer}/actions: procedure has no actions"),
                ));
                actions_ok = false;
            }
            for (i, a) in arr.elements.iter().enumerate() {
                match self.string(a, &format!("{pointer}/actions/{i}")) {
                    Some((text, ts)) => action_texts.push((text, ts)),
                    None => actions_ok = false,
                }
            }
        }
        let result = self.nullable_string(obj, "result", pointer);

        let (Some((name, name_span)), Ok(input), true, Ok(result)) = (name, input, actions_ok, result) else {
            return None;
        };
        parts.push((ElementPart::ProcedureName, name_span));
        let input = input.map(|(input, ps, vs)| {
            parts.push((ElementPart::InputProperty, ps));
            parts.push((ElementPart::InputValue, vs));
            input
        });
        let mut actions = Vec::new();
        for (i, (text, ts)) in action_texts.into_iter().enumerate() {
            parts.push((ElementPart::Action(i), ts));
            actions.push(text);
        }
        let result = result.map(|(text, ts)| {
            parts.push((ElementPart::Result, ts));
            text
        });
        let proc_ = self.model(Procedure::new(name, input, actions, result), obj.range, pointer)?;
        Some((Element::Procedure(proc_), ElementSpans { span, parts }))
    }
}

fn strict_options() -> ParseOptions {
    ParseOptions {
        allow_comments: false,
        allow_loose_object_property_names: false,
        allow_trailing_commas: false,
        allow_missing_commas: false,
        allow_single_quoted_strings: false,
        allow_hexadecimal_numbers: false,
        allow_unary_plus_numbers: false,
        allow_bare_decimal_point_numbers: false,
        allow_non_finite_numbers: false,
        allow_extended_string_escapes: false,
    }
}

/// Parses and schema-checks the JSON serialization.
pub fn parse_json(source: &str) -> ParseResult {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    if let Err(e) = serde_json::from_str::<serde_json::Value>(source) {
        let span = Span::new(e.line().max(1), e.column().max(1), 1);
        let diag = Diagnostic::error(rules::JSON_SYNTAX, span, format!("malformed JSON: {e}"));
        return ParseResult::finish(None, SourceMap::default(), vec![diag]);
    }
    let ast = match jsonc_parser::parse_to_ast(source, &CollectOptions::default(), &strict_options()) {
        Ok(parsed) => parsed.value,
        Err(e) => {
            let diag = Diagnostic::error(rules::JSON_SYNTAX, Span::default(), format!("malformed JSON: {e}"));
            return ParseResult::finish(None, SourceMap::default(), vec![diag]);
        }
    };
    let mut walker = Walker::new(source);
    let parsed = ast.as_ref().and_then(|v| walker.document(v));
    let (doc, map) = match parsed {
        Some((doc, map)) => (Some(doc), map),
        None => (None, SourceMap::default()),
    };
    ParseResult::finish(doc, map, walker.diags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::Severity;
    use crate::registry::InherentModule;

    #[test]
    fn minimal() {
        let res = parse_json(r#"{"name":"T","scenario":null,"extends":null,"modules":[]}"#);
        let doc = res.document.unwrap();
        assert_eq!(doc.name(), "T");
        assert!(doc.modules().is_empty());
        assert_eq!(res.diagnostics.iter().map(|d| d.code).collect::<Vec<_>>(), [rules::EMPTY_BODY]);
    }

    #[test]
    fn inherent_kind_with_unknown_name() {
        let src = r#"{"name":"T","modules":[{"kind":"inherent","name":"NoSuchModule","elements":[{"type":"freeform","text":"x"}]}]}"#;
        let res = parse_json(src);
        assert!(res.document.is_none());
        assert_eq!(res.diagnostics.len(), 1);
        let d = &res.diagnostics[0];
        assert_eq!(d.code, rules::JSON_SCHEMA);
        assert!(d.message.starts_with("/modules/0/name:"), "{}", d.message);
    }

    #[test]
    fn syntax_error_location() {
        let res = parse_json("{\n  \"name\": \"T\",\n  \"modules\": [,]\n}");
        assert_eq!(res.diagnostics.len(), 1);
        assert_eq!(res.diagnostics[0].code, rules::JSON_SYNTAX);
        assert_eq!(res.diagnostics[0].span.line, 3);
        assert!(parse_json(r#"{"name":"T","modules":[],}"#).has_errors());
    }

    #[test]
    fn type_errors_are_located() {
        let src = "{\n  \"name\": 5,\n  \"modules\": []\n}";
        let res = parse_json(src);
        let d = &res.diagnostics[0];
        assert_eq!((d.code, d.span), (rules::JSON_SCHEMA, Span::new(2, 11, 1)));
        assert_eq!(d.message, "/name: expected a string");
    }

    #[test]
    fn unknown_fields_warn() {
        let src = r#"{"name":"T","modules":[{"kind":"inherent","name":"goals","extra":1,"elements":[{"type":"freeform","text":"g"}]}]}"#;
        let res = parse_json(src);
        let doc = res.document.unwrap();
        assert_eq!(doc.modules()[0].name().as_str(), InherentModule::Goal.name());
        assert_eq!(res.diagnostics.len(), 1);
        assert_eq!(res.diagnostics[0].severity, Severity::Warning);
        assert_eq!(res.diagnostics[0].code, rules::JSON_UNKNOWN_FIELD);
    }

    #[test]
    fn procedure_element() {
        let src = r#"{"name":"T","scenario":"Writing","extends":null,"modules":[{"kind":"inherent","name":"Workflow","elements":[
            {"type":"procedure","procedureName":"P","input":{"property":"article","value":"<ARTICLE>"},"actions":["a","b"],"result":"the title"}]}]}"#;
        let res = parse_json(src);
        assert!(res.diagnostics.is_empty(), "{:?}", res.diagnostics);
        let doc = res.document.unwrap();
        let p = doc.modules()[0].elements()[0].as_procedure().unwrap();
        assert_eq!(p.actions(), ["a", "b"]);
        assert_eq!(p.result(), Some("the title"));
    }

    #[test]
    fn schema_violations() {
        let cases = [
            (r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[]}]}"#, rules::EMPTY_MODULE),
            (
                r#"{"name":"T","modules":[{"kind":"extension","name":"Profile","elements":[{"type":"freeform","text":"x"}]}]}"#,
                rules::JSON_SCHEMA,
            ),
            (
                r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[{"type":"freeform","text":"The a is b."}]}]}"#,
                rules::JSON_SCHEMA,
            ),
            (
                r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[{"type":"assignment","property":"a","value":"c","text":"The a is b."}]}]}"#,
                rules::JSON_SCHEMA,
            ),
            (
                r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[{"type":"procedure","procedureName":"P","actions":[]}]}]}"#,
                rules::EMPTY_PROC,
            ),
            (
                r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[{"type":"bogus"}]}]}"#,
                rules::JSON_SCHEMA,
            ),
            (r#"{"name":"T","name":"U","modules":[]}"#, rules::JSON_SCHEMA),
            (r#"{"modules":[]}"#, rules::JSON_SCHEMA),
            (r#"[]"#, rules::JSON_SCHEMA),
        ];
        for (src, code) in cases {
            let res = parse_json(src);
            assert!(res.document.is_none(), "{src}");
            assert_eq!(res.diagnostics.iter().map(|d| d.code).collect::<Vec<_>>(), [code], "{src}");
        }
    }

    #[test]
    fn duplicate_modules() {
        let src = r#"{"name":"T","modules":[
            {"kind":"inherent","name":"Goal","elements":[{"type":"freeform","text":"a"}]},
            {"kind":"inherent","name":"goals","elements":[{"type":"freeform","text":"b"}]}]}"#;
        let res = parse_json(src);
        assert_eq!(res.diagnostics.len(), 1);
        assert_eq!(res.diagnostics[0].code, rules::DUP_MODULE);
        assert_eq!(res.diagnostics[0].span.line, 3);
    }

    #[test]
    fn escaped_strings_map_approximately() {
        let src = r#"{"name":"T","modules":[{"kind":"inherent","name":"Goal","elements":[{"type":"freeform","text":"a\"b <X>"}]}]}"#;
        let res = parse_json(src);
        let map = res.source_map.unwrap();
        assert!(!map.part(0, 0, ElementPart::Text).exact);
    }
}
