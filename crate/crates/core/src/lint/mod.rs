//! Lint rules over parsed documents.

mod config;

use std::path::Path;

pub use config::{default_rules, ConfigError, LintConfig};

use crate::diagnostic::{sort_diagnostics, Diagnostic, Severity};
use crate::model::{Element, ElementPart, ModuleName, PromptDocument, Span};
use crate::parser::SourceMap;
use crate::registry::{InherentModule, ScenarioMatrix, ScenarioName};
use crate::render::{canonical_key, render_markdown_mapped};
use crate::rules::{self, lookup};
use crate::template::{list_placeholders, TemplateBindings};

/// Optional inputs beyond the document itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct LintContext<'a> {
    /// Spans of the parsed source; without one, spans refer to the
    /// canonical Markdown rendering of the document.
    pub source_map: Option<&'a SourceMap>,
    /// Sidecar bindings; placeholders bound here are not reported.
    pub bindings: Option<&'a TemplateBindings>,
    pub file: Option<&'a Path>,
    /// Overrides the document's own scenario.
    pub scenario: Option<&'a ScenarioName>,
}

pub fn lint(
    doc: &PromptDocument,
    matrix: &ScenarioMatrix,
    config: &LintConfig,
) -> Result<Vec<Diagnostic>, ConfigError> {
    lint_with(doc, LintContext::default(), matrix, config)
}

/// Runs every enabled lint-stage rule. Findings are ordered by
/// (file, line, column, code).
pub fn lint_with(
    doc: &PromptDocument,
    ctx: LintContext<'_>,
    matrix: &ScenarioMatrix,
    config: &LintConfig,
) -> Result<Vec<Diagnostic>, ConfigError> {
    let resolved = config.resolve(matrix)?;
    let synthetic;
    let map = match ctx.source_map {
        Some(map) => map,
        None => {
            synthetic = render_markdown_mapped(doc).1;
            &synthetic
        }
    };
    let mut linter = Linter { doc, map, matrix, config, scenario: ctx.scenario.or(doc.scenario()), out: Vec::new() };
    for code in &resolved.enabled {
        match *code {
            rules::NONCANON_ORDER => linter.noncanon_order(),
            rules::UNREGISTERED_EXT => linter.unregistered_ext(),
            rules::BAD_EXT_NAME => linter.bad_ext_name(),
            rules::UNKNOWN_SCENARIO => linter.unknown_scenario(),
            rules::MISSING_REQUIRED => linter.missing_required(&resolved.required),
            rules::UNBOUND_PLACEHOLDER => linter.unbound_placeholder(ctx.bindings),
            rules::EMPTY_PROC_RESULT => linter.empty_proc_result(),
            rules::OFF_MATRIX => linter.off_matrix(),
            rules::OVERLONG => linter.overlong(),
            rules::THIN_MODULE => linter.thin_module(),
            rules::PATTERN_INFO => linter.pattern_info(),
            other => unreachable!("lint-stage rule {other} has no implementation"),
        }
    }
    let mut out = linter.out;
    if let Some(file) = ctx.file {
        out = out.into_iter().map(|d| d.with_file(file)).collect();
    }
    sort_diagnostics(&mut out);
    Ok(out)
}

struct Linter<'a> {
    doc: &'a PromptDocument,
    map: &'a SourceMap,
    matrix: &'a ScenarioMatrix,
    config: &'a LintConfig,
    scenario: Option<&'a ScenarioName>,
    out: Vec<Diagnostic>,
}

impl<'a> Linter<'a> {
    fn emit(&mut self, code: &'static str, span: Span, message: String) {
        let severity = lookup(code).expect("emitted codes are in the rule table").severity;
        self.emit_as(severity, code, span, message);
    }

    fn emit_as(&mut self, severity: Severity, code: &'static str, span: Span, message: String) {
        self.out.push(Diagnostic::new(severity, code, span, message));
    }

    fn extensions(&self) -> impl Iterator<Item = (usize, &'a str)> + 'a {
        self.doc.modules().iter().enumerate().filter_map(|(i, m)| match m.name() {
            ModuleName::Extension(name) => Some((i, name.as_str())),
            ModuleName::Inherent(_) => None,
        })
    }

    fn noncanon_order(&mut self) {
        let mut order: Vec<usize> = (0..self.doc.modules().len()).collect();
        order.sort_by_key(|&i| canonical_key(&self.doc.modules()[i], i, self.matrix));
        if let Some(pos) = order.iter().enumerate().position(|(pos, &i)| pos != i) {
            let expected = self.doc.modules()[order[pos]].name().as_str();
            let found = self.doc.modules()[pos].name().as_str();
            self.emit(
                rules::NONCANON_ORDER,
                self.map.module(pos),
                format!("modules are not in canonical order: `{expected}` should come before `{found}`"),
            );
        }
    }

    fn unregistered_ext(&mut self) {
        if self.config.allow_adhoc {
            return;
        }
        let found: Vec<_> = self
            .extensions()
            .filter(|(_, name)| {
                self.matrix.extension(name).is_none() && InherentModule::loosely_matching(name).is_none()
            })
            .collect();
        for (i, name) in found {
            self.emit(
                rules::UNREGISTERED_EXT,
                self.map.module(i),
                format!("extension module `{name}` is not registered"),
            );
        }
    }

    fn bad_ext_name(&mut self) {
        let found: Vec<_> = self
            .extensions()
            .filter_map(|(i, name)| InherentModule::loosely_matching(name).map(|m| (i, name, m)))
            .collect();
        for (i, name, inherent) in found {
            self.emit(
                rules::BAD_EXT_NAME,
                self.map.module(i),
                format!("extension module `{name}` shadows inherent module `{inherent}`; use `## {inherent}`"),
            );
        }
    }

    fn unknown_scenario(&mut self) {
        if let Some(s) = self.scenario {
            if !self.matrix.has_scenario(s) {
                self.emit(
                    rules::UNKNOWN_SCENARIO,
                    self.map.scenario.unwrap_or(self.map.title),
                    format!("scenario `{s}` is neither built in nor registered"),
                );
            }
        }
    }

    /// Skipped for documents with a base (the base may supply the module)
    /// and for empty bodies, which the parser already reports.
    fn missing_required(&mut self, required: &[ModuleName]) {
        if self.doc.extends().is_some() || self.doc.modules().is_empty() {
            return;
        }
        for name in required {
            if !self.doc.modules().iter().any(|m| m.name() == name) {
                self.emit(rules::MISSING_REQUIRED, self.map.title, format!("required module `{name}` is missing"));
            }
        }
    }

    fn unbound_placeholder(&mut self, bindings: Option<&TemplateBindings>) {
        for p in list_placeholders(self.doc) {
            if bindings.is_some_and(|b| b.contains(&p.name)) {
                continue;
            }
            let first = &p.occurrences[0];
            let span =
                self.map.part(first.module, first.element, first.part).sub(first.span.column - 1, first.span.length);
            let count = p.occurrences.len();
            let times = if count == 1 { "once".to_string() } else { format!("{count} times") };
            self.emit(rules::UNBOUND_PLACEHOLDER, span, format!("placeholder <{}> ({times}) has no binding", p.name));
        }
    }

    fn empty_proc_result(&mut self) {
        for (mi, module) in self.doc.modules().iter().enumerate() {
            for (ei, element) in module.elements().iter().enumerate() {
                let Some(p) = element.as_procedure() else { continue };
                let last = p.actions().last().map(String::as_str).unwrap_or_default();
                let first_word = last.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default();
                if p.result().is_none() && first_word.eq_ignore_ascii_case("return") {
                    self.emit(
                        rules::EMPTY_PROC_RESULT,
                        self.map.element(mi, ei),
                        format!("procedure `{}` ends with a return action but has no `- Return ...` result", p.name()),
                    );
                }
            }
        }
    }

    fn off_matrix(&mut self) {
        let Some(scenario) = self.scenario else { return };
        if !self.matrix.has_scenario(scenario) {
            return;
        }
        let severity = if self.config.scenario_strict { Severity::Error } else { Severity::Warning };
        for (i, module) in self.doc.modules().iter().enumerate() {
            let name = module.name();
            if let ModuleName::Extension(ext) = name {
                if self.matrix.extension(ext).is_none() {
                    continue;
                }
            }
            if !self.matrix.is_defined(scenario, name.as_str()).unwrap_or(true) {
                self.emit_as(
                    severity,
                    rules::OFF_MATRIX,
                    self.map.module(i),
                    format!("module `{name}` is not designed for scenario `{scenario}`"),
                );
            }
        }
    }

    fn overlong(&mut self) {
        let limit = self.config.max_element_length;
        for (mi, module) in self.doc.modules().iter().enumerate() {
            for (ei, element) in module.elements().iter().enumerate() {
                for (part, text) in element.parts() {
                    let len = text.chars().count();
                    if len > limit {
                        let span = self.map.part(mi, ei, part).span;
                        self.emit(
                            rules::OVERLONG,
                            span,
                            format!("element text is {len} characters long (limit {limit})"),
                        );
                    }
                }
            }
        }
    }

    fn thin_module(&mut self) {
        let min = self.config.min_module_elements;
        for (i, module) in self.doc.modules().iter().enumerate() {
            let n = module.elements().len();
            if n < min {
                self.emit(
                    rules::THIN_MODULE,
                    self.map.module(i),
                    format!("module `{}` has {n} element(s); at least {min} expected", module.name()),
                );
            }
        }
    }

    fn pattern_info(&mut self) {
        for (mi, module) in self.doc.modules().iter().enumerate() {
            for (ei, element) in module.elements().iter().enumerate() {
                let Element::Freeform { text } = element else { continue };
                if looks_like_assignment(text) {
                    let span = self.map.part(mi, ei, ElementPart::Text).span;
                    self.emit(
                        rules::PATTERN_INFO,
                        span,
                        "sentence reads like an assignment; the basic pattern is `The <property> is <value>.`".into(),
                    );
                }
            }
        }
    }
}

/// Freeform text with an `is` between words: a property/value statement
/// that the assignment pattern did not match.
fn looks_like_assignment(text: &str) -> bool {
    let lower = text.to_lowercase();
    lower.contains(" is ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModuleInstance, Procedure};
    use crate::parser::parse_markdown;
    use crate::registry::builtin_matrix;

    fn parsed(src: &str) -> (PromptDocument, SourceMap) {
        let r = parse_markdown(src);
        assert!(!r.has_errors(), "{:?}", r.diagnostics);
        (r.document.unwrap(), r.source_map.unwrap())
    }

    fn run(src: &str, config: &LintConfig) -> Vec<Diagnostic> {
        let (doc, map) = parsed(src);
        let ctx = LintContext { source_map: Some(&map), ..Default::default() };
        lint_with(&doc, ctx, &builtin_matrix(), config).unwrap()
    }

    fn codes(d: &[Diagnostic]) -> Vec<&'static str> {
        d.iter().map(|d| d.code).collect()
    }

    #[test]
    fn writing_with_suggestion_is_off_matrix() {
        let src = "# T\nScenario: Writing\n\n## Profile\n- p\n\n## Goal\n- g\n\n## Suggestion\n- s\n";
        let d = run(src, &LintConfig::default());
        assert_eq!(codes(&d), [rules::OFF_MATRIX]);
        assert_eq!(d[0].span, Span::new(10, 1, 13));
        assert_eq!(d[0].severity, Severity::Warning);
        let strict = LintConfig { scenario_strict: true, ..LintConfig::default() };
        assert_eq!(run(src, &strict)[0].severity, Severity::Error);
    }

    #[test]
    fn supplementary_learning_accepts_every_inherent_module() {
        let mut src = String::from("# T\nScenario: SupplementaryLearning\n");
        for m in InherentModule::ALL {
            src.push_str(&format!("\n## {m}\n- x\n"));
        }
        assert!(run(&src, &LintConfig::default()).is_empty());
    }

    #[test]
    fn missing_goal() {
        let d = run("# T\n\n## Profile\n- p\n", &LintConfig::default());
        assert_eq!(codes(&d), [rules::MISSING_REQUIRED]);
        assert!(d[0].message.contains("`Goal`"));
        assert_eq!(d[0].span, Span::new(1, 3, 1));
    }

    #[test]
    fn unbound_placeholder_uses_first_occurrence() {
        let src = "# T\n\n## Profile\n- p\n\n## Goal\n- Summarise <TEXT> then <TEXT>\n";
        let d = run(src, &LintConfig::default());
        assert_eq!(codes(&d), [rules::UNBOUND_PLACEHOLDER]);
        assert_eq!(d[0].span, Span::new(7, 13, 6));
        let (doc, map) = parsed(src);
        let b = TemplateBindings::new([("TEXT", "x")]).unwrap();
        let ctx = LintContext { source_map: Some(&map), bindings: Some(&b), ..Default::default() };
        assert!(lint_with(&doc, ctx, &builtin_matrix(), &LintConfig::default()).unwrap().is_empty());
    }

    #[test]
    fn synthetic_spans_without_source_map() {
        let doc = PromptDocument::new(
            "T",
            None,
            None,
            vec![ModuleInstance::inherent(
                InherentModule::Workflow,
                vec![Element::Procedure(Procedure::new("P", None, vec!["Return the answer".into()], None).unwrap())],
            )
            .unwrap()],
        )
        .unwrap();
        let config = LintConfig { required_modules: vec![], ..LintConfig::default() };
        let d = lint(&doc, &builtin_matrix(), &config).unwrap();
        assert_eq!(codes(&d), [rules::EMPTY_PROC_RESULT]);
        assert_eq!(d[0].span.line, 4);
    }

    #[test]
    fn file_is_attached() {
        let (doc, _) = parsed("# T\n\n## Goal\n- g\n");
        let ctx = LintContext { file: Some(Path::new("x.lgpt.md")), ..Default::default() };
        let d = lint_with(&doc, ctx, &builtin_matrix(), &LintConfig::default()).unwrap();
        assert_eq!(
            d[0].to_string(),
            "x.lgpt.md:1:3: warning[P3-MISSING-REQUIRED]: required module `Profile` is missing"
        );
    }

    #[test]
    fn pattern_info_only_for_is_sentences() {
        assert!(looks_like_assignment("the tone is calm"));
        assert!(looks_like_assignment("Tone is calm."));
        assert!(!looks_like_assignment("The length of the title should not exceed 20 words."));
        assert!(!looks_like_assignment("This island"));
    }

    #[test]
    fn unknown_rule_is_config_error() {
        let (doc, _) = parsed("# T\n\n## Goal\n- g\n");
        let config = LintConfig::default().with("P9-NOPE");
        assert!(lint(&doc, &builtin_matrix(), &config).is_err());
    }
}
