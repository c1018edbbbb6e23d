//! The published rule table. Every diagnostic carries one of these codes.

use std::fmt;

use thiserror::Error;

use crate::diagnostic::Severity;

pub const NO_TITLE: &str = "P1-NO-TITLE";
pub const DUP_MODULE: &str = "P1-DUP-MODULE";
pub const EMPTY_MODULE: &str = "P1-EMPTY-MODULE";
pub const EMPTY_PROC: &str = "P1-EMPTY-PROC";
pub const STRAY_TEXT: &str = "P1-STRAY-TEXT";
pub const EMPTY_BODY: &str = "P1-EMPTY-BODY";
pub const JSON_SYNTAX: &str = "P1-JSON-SYNTAX";
pub const JSON_SCHEMA: &str = "P1-JSON-SCHEMA";
pub const JSON_UNKNOWN_FIELD: &str = "P1-JSON-UNKNOWN-FIELD";
pub const NONCANON_ORDER: &str = "P1-NONCANON-ORDER";
pub const UNREGISTERED_EXT: &str = "P2-UNREGISTERED-EXT";
pub const BAD_EXT_NAME: &str = "P2-BAD-EXT-NAME";
pub const UNKNOWN_SCENARIO: &str = "P2-UNKNOWN-SCENARIO";
pub const MISSING_REQUIRED: &str = "P3-MISSING-REQUIRED";
pub const UNBOUND_PLACEHOLDER: &str = "P3-UNBOUND-PLACEHOLDER";
pub const EMPTY_PROC_RESULT: &str = "P3-EMPTY-PROC-RESULT";
pub const OFF_MATRIX: &str = "P3-OFF-MATRIX";
pub const OVERLONG: &str = "P3-OVERLONG";
pub const THIN_MODULE: &str = "P3-THIN-MODULE";
pub const PATTERN_INFO: &str = "P4-PATTERN-INFO";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Principle {
    RegularisedFormat,
    ExtensibleStructure,
    ClearAndComplete,
    FlexibleLanguage,
}

impl Principle {
    pub fn number(self) -> u8 {
        match self {
            Principle::RegularisedFormat => 1,
            Principle::ExtensibleStructure => 2,
            Principle::ClearAndComplete => 3,
            Principle::FlexibleLanguage => 4,
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Principle::RegularisedFormat => "prompts follow a regularised format",
            Principle::ExtensibleStructure => "prompt structure is extensible",
            Principle::ClearAndComplete => "requirements are clear and complete",
            Principle::FlexibleLanguage => "wording stays flexible",
        }
    }
}

impl fmt::Display for Principle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "principle {} ({})", self.number(), self.title())
    }
}

/// Parse-stage rules run inside the parsers and cannot be disabled; lint-stage
/// rules run over parsed documents and honour `enabled_rules`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Parse,
    Lint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rule {
    pub code: &'static str,
    pub severity: Severity,
    pub stage: Stage,
    pub principle: Principle,
    pub enabled_by_default: bool,
    pub summary: &'static str,
    /// What the rule checks for, in terms of the framework it enforces.
    pub anchor: &'static str,
}

const fn rule(
    code: &'static str,
    severity: Severity,
    stage: Stage,
    principle: Principle,
    summary: &'static str,
    anchor: &'static str,
) -> Rule {
    Rule { code, severity, stage, principle, enabled_by_default: true, summary, anchor }
}

use Principle::*;
use Severity::{Error as E, Info as I, Warning as W};
use Stage::{Lint, Parse};

pub const RULES: &[Rule] = &[
    rule(NO_TITLE, E, Parse, RegularisedFormat,
        "the document does not start with a `# <name>` title line",
        "a prompt is a named document made of modules"),
    rule(DUP_MODULE, E, Parse, RegularisedFormat,
        "the same module appears twice (names compare case-insensitively, aliases resolved)",
        "each module covers one aspect of the prompt exactly once"),
    rule(EMPTY_MODULE, E, Parse, RegularisedFormat,
        "a module heading has no elements under it",
        "modules hold one or more elements"),
    rule(EMPTY_PROC, E, Parse, RegularisedFormat,
        "a procedure has no action bullets, or its `Return` bullet comes before any action",
        "a procedure element lists the actions to execute"),
    rule(STRAY_TEXT, E, Parse, RegularisedFormat,
        "a line that is not part of the dialect: prose outside bullets, misplaced bullets or headers, malformed procedure leads",
        "every line of a prompt belongs to a module or an element"),
    rule(EMPTY_BODY, W, Parse, RegularisedFormat,
        "the document has a title but no modules and no `Extends:` base",
        "a complete prompt contains modules"),
    rule(JSON_SYNTAX, E, Parse, RegularisedFormat,
        "the JSON source is not well-formed",
        "the JSON serialization is one of the two supported formats"),
    rule(JSON_SCHEMA, E, Parse, RegularisedFormat,
        "the JSON document violates the document schema",
        "the JSON serialization mirrors the module/element structure"),
    rule(JSON_UNKNOWN_FIELD, W, Parse, RegularisedFormat,
        "the JSON document has a field the schema does not define",
        "the JSON serialization mirrors the module/element structure"),
    rule(NONCANON_ORDER, I, Lint, RegularisedFormat,
        "modules are not in canonical order (inherent modules by matrix column, then extensions)",
        "a regular layout makes prompts easier to read and compare"),
    rule(UNREGISTERED_EXT, W, Lint, ExtensibleStructure,
        "an extension module is used without being declared in the registry",
        "extension modules are declared before use so tooling knows where they apply"),
    rule(BAD_EXT_NAME, W, Lint, ExtensibleStructure,
        "an extension module name is a near-spelling of an inherent module or alias",
        "extensions add new aspects instead of shadowing inherent modules"),
    rule(UNKNOWN_SCENARIO, W, Lint, ExtensibleStructure,
        "the declared scenario is neither built in nor registered",
        "custom scenarios are declared in the registry"),
    rule(MISSING_REQUIRED, W, Lint, ClearAndComplete,
        "a required module (default: Profile and Goal) is absent",
        "every prompt states its role and its goal"),
    rule(UNBOUND_PLACEHOLDER, I, Lint, ClearAndComplete,
        "the prompt contains `<NAME>` placeholders with no binding in a sidecar file",
        "angle-bracket placeholders must be populated before the prompt is used"),
    rule(EMPTY_PROC_RESULT, W, Lint, ClearAndComplete,
        "a procedure's last action starts with `Return` but the procedure has no result bullet",
        "a procedure names its input, its actions and, when it produces one, its result"),
    rule(OFF_MATRIX, W, Lint, ClearAndComplete,
        "a module is used that is not designed for the declared scenario in the scenario module matrix",
        "the scenario module matrix lists which inherent modules are designed for each scenario"),
    rule(OVERLONG, W, Lint, ClearAndComplete,
        "an element text is longer than `max_element_length` characters",
        "elements are direct, specific instructions"),
    Rule {
        enabled_by_default: false,
        ..rule(THIN_MODULE, W, Lint, ClearAndComplete,
            "experimental: a module has fewer than `min_module_elements` elements",
            "each module should say enough to be unambiguous")
    },
    rule(PATTERN_INFO, I, Lint, FlexibleLanguage,
        "a freeform element reads like an assignment but is not in `The <property> is <value>.` form",
        "basic element patterns are suggestions; wording may be adapted"),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown rule `{0}`")]
pub struct UnknownRule(pub String);

pub fn lookup(code: &str) -> Option<&'static Rule> {
    RULES.iter().find(|r| r.code.eq_ignore_ascii_case(code.trim()))
}

/// Human-readable description of a rule: what it flags, which design
/// principle it enforces and the framework idea it rests on.
pub fn explain_rule(code: &str) -> Result<String, UnknownRule> {
    let rule = lookup(code).ok_or_else(|| UnknownRule(code.to_string()))?;
    let stage = match rule.stage {
        Stage::Parse => "parse stage, always on",
        Stage::Lint if rule.enabled_by_default => "lint stage",
        Stage::Lint => "lint stage, disabled by default",
    };
    Ok(format!(
        "{code} ({severity}, {stage})\n  flags: {summary}\n  enforces: {principle}\n  basis: {anchor}\n",
        code = rule.code,
        severity = rule.severity,
        summary = rule.summary,
        principle = rule.principle,
        anchor = rule.anchor,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_are_unique_and_well_formed() {
        for (i, r) in RULES.iter().enumerate() {
            assert!(RULES[..i].iter().all(|o| o.code != r.code), "{}", r.code);
            let family = format!("P{}-", r.principle.number());
            assert!(r.code.starts_with(&family), "{} not in family {family}", r.code);
        }
    }

    #[test]
    fn flexibility_rules_are_advisory() {
        for r in RULES.iter().filter(|r| r.principle == Principle::FlexibleLanguage) {
            assert_eq!(r.severity, Severity::Info);
        }
    }

    #[test]
    fn explain() {
        let text = explain_rule("P3-OFF-MATRIX").unwrap();
        assert!(text.contains("scenario module matrix"), "{text}");
        assert!(text.contains("principle 3"));
        let text = explain_rule("P1-DUP-MODULE").unwrap();
        assert!(text.contains("principle 1 (prompts follow a regularised format)"), "{text}");
        assert_eq!(explain_rule("P9-NOPE"), Err(UnknownRule("P9-NOPE".into())));
    }
}
