//! Shared test helpers: a generator of valid documents and independent
//! oracles used by the property tests.
#![allow(dead_code)]

use std::path::PathBuf;

use promptlang::{
    classify_element_line, Element, InherentModule, ModuleInstance, ModuleName, Procedure, ProcedureInput,
    PromptDocument, ScenarioName,
};
use proptest::prelude::*;
use proptest::sample::{select, subsequence};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const WORDS: &[&str] = &[
    "article",
    "title",
    "editor",
    "the",
    "a",
    "concise",
    "summary",
    "reader",
    "tone",
    "theme",
    "core",
    "content",
    "analyse",
    "write",
    "keep",
    "under",
    "20",
    "words;",
    "formal.",
    "café",
    "résumé",
    "and",
    "with",
    "for",
    "each",
    "step",
    "(optional)",
    "answer:",
    "x=y",
    "#tag",
    "*bold*",
    "`code`",
    "100%",
];

fn word() -> impl Strategy<Value = String> {
    prop_oneof![
        6 => select(WORDS).prop_map(str::to_string),
        1 => "[A-Z][A-Z0-9_]{0,6}".prop_map(|n| format!("<{n}>")),
        1 => "[A-Z]{1,4}".prop_map(|n| format!("\\<{n}>")),
        1 => "[a-z]{1,8}".prop_filter("reserved word", |w| w != "of"),
    ]
}

/// A trimmed, non-empty, single-line text that does not start with
/// `Return` and contains no ` of `.
pub fn text() -> impl Strategy<Value = String> {
    prop::collection::vec(word(), 1..6).prop_map(|w| w.join(" "))
}

pub fn bullet() -> impl Strategy<Value = Element> {
    prop_oneof![text(), (text(), text()).prop_map(|(p, v)| format!("The {p} is {v}.")),]
        .prop_map(|t| classify_element_line(&t).expect("generated text is a valid line"))
}

pub fn procedure() -> impl Strategy<Value = Element> {
    let input = prop_oneof![
        (text(), text()).prop_map(|(p, v)| ProcedureInput::new(p, v).unwrap()),
        (text(), "[A-Z][A-Z_]{0,5}").prop_map(|(p, n)| ProcedureInput::new(p, format!("<{n}>")).unwrap()),
    ];
    let action = prop_oneof![4 => text(), 1 => text().prop_map(|t| format!("Return {t}"))];
    (text(), prop::option::of(input), prop::collection::vec(action, 1..5), prop::option::of(text())).prop_map(
        |(name, input, actions, result)| {
            Element::Procedure(Procedure::new(name, input, actions, result).expect("generated procedure is valid"))
        },
    )
}

pub fn elements() -> impl Strategy<Value = Vec<Element>> {
    prop::collection::vec(prop_oneof![3 => bullet(), 1 => procedure()], 1..5)
}

const EXTENSIONS: &[&str] = &["Safety", "Audience", "Tone Guide", "Pricing", "Memory Notes"];

pub fn module_names() -> impl Strategy<Value = Vec<ModuleName>> {
    let inherent: Vec<ModuleName> = InherentModule::ALL.into_iter().map(ModuleName::Inherent).collect();
    let ext: Vec<ModuleName> = EXTENSIONS.iter().map(|e| ModuleName::Extension(e.to_string())).collect();
    (subsequence(inherent, 0..=11), subsequence(ext, 0..=2)).prop_flat_map(|(mut a, b)| {
        a.extend(b);
        Just(a).prop_shuffle()
    })
}

pub fn document() -> impl Strategy<Value = PromptDocument> {
    let scenario = prop::option::of(select(promptlang::BuiltinScenario::ALL.to_vec()));
    let extends = prop::option::of(select(&["base", "shared/common.lgpt.md", "parent"][..]));
    (text(), scenario, extends, module_names())
        .prop_flat_map(|(name, scenario, extends, names)| {
            let n = names.len();
            (Just(name), Just(scenario), Just(extends), Just(names), prop::collection::vec(elements(), n))
        })
        .prop_filter_map("module invariants", |(name, scenario, extends, names, elements)| {
            let modules = names
                .into_iter()
                .zip(elements)
                .map(|(n, e)| ModuleInstance::new(n, e))
                .collect::<Result<Vec<_>, _>>()
                .ok()?;
            PromptDocument::new(name, scenario.map(ScenarioName::Builtin), extends.map(String::from), modules).ok()
        })
}

/// Plain-data view of a document built only from public getters.
#[derive(Debug, PartialEq, Eq)]
pub struct Projection {
    pub header: Vec<String>,
    pub modules: Vec<(String, String, Vec<Vec<String>>)>,
}

pub fn project(doc: &PromptDocument) -> Projection {
    Projection {
        header: vec![
            doc.name().to_string(),
            doc.scenario().map(|s| s.as_str().to_string()).unwrap_or_default(),
            doc.extends().unwrap_or_default().to_string(),
        ],
        modules: doc
            .modules()
            .iter()
            .map(|m| {
                let kind = format!("{:?}", m.kind());
                let elements = m
                    .elements()
                    .iter()
                    .map(|e| match e {
                        Element::Assignment { property, value, text } => {
                            vec!["assignment".into(), property.clone(), value.clone(), text.clone()]
                        }
                        Element::Freeform { text } => vec!["freeform".into(), text.clone()],
                        Element::Procedure(p) => {
                            let mut v = vec!["procedure".into(), p.name().to_string()];
                            match p.input() {
                                Some(i) => v.extend([i.property().to_string(), i.value().to_string()]),
                                None => v.extend([String::new(), String::new()]),
                            }
                            v.push(p.actions().len().to_string());
                            v.extend(p.actions().iter().cloned());
                            v.push(p.result().unwrap_or("\u{0}").to_string());
                            v
                        }
                    })
                    .collect();
                (kind, m.name().as_str().to_string(), elements)
            })
            .collect(),
    }
}

/// Brute-force placeholder scan: every `<NAME>` whose `<` is not preceded
/// by a backslash, as (name, 1-based char column).
pub fn brute_force_placeholders(text: &str) -> Vec<(String, usize)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    for i in 0..chars.len() {
        if chars[i] != '<' || (i > 0 && chars[i - 1] == '\\') {
            continue;
        }
        let Some(close) = (i + 1..chars.len()).find(|&j| chars[j] == '>') else { continue };
        let name: String = chars[i + 1..close].iter().collect();
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_uppercase())
            && name.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_');
        if valid {
            out.push((name, i + 1));
        }
    }
    out
}

/// One triggering fixture per rule code: `rules/<stem>.bad.lgpt.<ext>`
/// yields exactly one finding at (line, column); its sibling
/// `rules/<stem>.good.lgpt.<ext>` yields none.
pub struct RuleFixture {
    pub code: &'static str,
    pub ext: &'static str,
    pub line: usize,
    pub column: usize,
}

impl RuleFixture {
    pub fn stem(&self) -> String {
        self.code.to_ascii_lowercase()
    }

    pub fn path(&self, variant: &str) -> PathBuf {
        fixture_dir().join("rules").join(format!("{}.{variant}.lgpt.{}", self.stem(), self.ext))
    }

    /// The experimental rule is off by default, so its fixtures run with it on.
    pub fn config(&self) -> promptlang::LintConfig {
        let config = promptlang::LintConfig::default();
        if self.code == "P3-THIN-MODULE" {
            config.with(self.code)
        } else {
            config
        }
    }
}

const fn rf(code: &'static str, ext: &'static str, line: usize, column: usize) -> RuleFixture {
    RuleFixture { code, ext, line, column }
}

pub const RULE_FIXTURES: &[RuleFixture] = &[
    rf("P1-NO-TITLE", "md", 1, 1),
    rf("P1-DUP-MODULE", "md", 9, 1),
    rf("P1-EMPTY-MODULE", "md", 9, 1),
    rf("P1-EMPTY-PROC", "md", 10, 1),
    rf("P1-STRAY-TEXT", "md", 8, 1),
    rf("P1-EMPTY-BODY", "md", 1, 3),
    rf("P1-JSON-SYNTAX", "json", 5, 41),
    rf("P1-JSON-SCHEMA", "json", 2, 11),
    rf("P1-JSON-UNKNOWN-FIELD", "json", 3, 3),
    rf("P1-NONCANON-ORDER", "md", 3, 1),
    rf("P2-UNREGISTERED-EXT", "md", 9, 1),
    rf("P2-BAD-EXT-NAME", "md", 9, 1),
    rf("P2-UNKNOWN-SCENARIO", "md", 2, 1),
    rf("P3-MISSING-REQUIRED", "md", 1, 3),
    rf("P3-UNBOUND-PLACEHOLDER", "md", 7, 23),
    rf("P3-EMPTY-PROC-RESULT", "md", 10, 1),
    rf("P3-OFF-MATRIX", "md", 10, 1),
    rf("P3-OVERLONG", "md", 10, 3),
    rf("P3-THIN-MODULE", "md", 3, 1),
    rf("P4-PATTERN-INFO", "md", 10, 3),
];

/// Parses and lints a fixture file with the built-in matrix.
pub fn check_fixture(path: &std::path::Path, config: &promptlang::LintConfig) -> Vec<promptlang::Diagnostic> {
    let source = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let options = promptlang::CheckOptions { format: promptlang::Format::from_path(path), ..Default::default() };
    promptlang::check_source(&source, &options, &promptlang::builtin_matrix(), config)
        .expect("fixture config is valid")
        .diagnostics
}
