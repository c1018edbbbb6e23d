mod support;

use promptlang::rules::{Stage, RULES};
use promptlang::{builtin_matrix, lint, lint_with, LintConfig, LintContext, Severity};
use proptest::prelude::*;

#[test]
fn every_rule_has_fixtures() {
    for rule in RULES {
        assert!(support::RULE_FIXTURES.iter().any(|f| f.code == rule.code), "no fixture for {}", rule.code);
    }
    assert_eq!(support::RULE_FIXTURES.len(), RULES.len());
}

#[test]
fn triggering_fixtures_yield_one_finding() {
    for f in support::RULE_FIXTURES {
        let found = support::check_fixture(&f.path("bad"), &f.config());
        assert_eq!(found.len(), 1, "{}: {found:?}", f.code);
        let d = &found[0];
        assert_eq!(d.code, f.code);
        assert_eq!((d.span.line, d.span.column), (f.line, f.column), "{}: {}", f.code, d.message);
    }
}

#[test]
fn clean_siblings_yield_nothing() {
    for f in support::RULE_FIXTURES {
        let found = support::check_fixture(&f.path("good"), &f.config());
        assert!(found.is_empty(), "{}: {found:?}", f.code);
    }
}

#[test]
fn disabling_a_rule_silences_its_fixture() {
    for f in support::RULE_FIXTURES {
        let rule = promptlang::rules::lookup(f.code).unwrap();
        if rule.stage == Stage::Parse {
            continue;
        }
        let found = support::check_fixture(&f.path("bad"), &f.config().without(f.code));
        assert!(found.is_empty(), "{}: {found:?}", f.code);
    }
}

fn lint_codes() -> Vec<&'static str> {
    RULES.iter().filter(|r| r.stage == Stage::Lint).map(|r| r.code).collect()
}

fn all_rules_config() -> LintConfig {
    LintConfig { enabled_rules: lint_codes().into_iter().map(String::from).collect(), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Disabling one rule removes exactly that rule's findings.
    #[test]
    fn monotonic_under_disabling(doc in support::document(), pick in 0usize..11) {
        let codes = lint_codes();
        let code = codes[pick % codes.len()];
        let config = all_rules_config();
        let matrix = builtin_matrix();
        let full = lint(&doc, &matrix, &config).unwrap();
        let reduced = lint(&doc, &matrix, &config.without(code)).unwrap();
        let expected: Vec<_> = full.iter().filter(|d| d.code != code).cloned().collect();
        prop_assert_eq!(reduced, expected);
    }

    #[test]
    fn lint_is_deterministic(doc in support::document()) {
        let m = builtin_matrix();
        let c = all_rules_config();
        prop_assert_eq!(lint(&doc, &m, &c).unwrap(), lint(&doc, &m, &c).unwrap());
    }

    #[test]
    fn flexibility_rules_stay_advisory(doc in support::document(), strict: bool, len in 1usize..40) {
        let config = LintConfig { scenario_strict: strict, max_element_length: len, ..all_rules_config() };
        for d in lint(&doc, &builtin_matrix(), &config).unwrap() {
            if d.code.starts_with("P4-") {
                prop_assert_eq!(d.severity, Severity::Info);
            }
        }
    }

    #[test]
    fn findings_are_ordered(doc in support::document()) {
        let found = lint(&doc, &builtin_matrix(), &all_rules_config()).unwrap();
        for pair in found.windows(2) {
            prop_assert!(pair[0].source_order(&pair[1]).is_le());
        }
    }
}

#[test]
fn scenario_override_applies() {
    let doc =
        promptlang::parse_markdown("# T\n\n## Profile\n- p\n\n## Goal\n- g\n\n## Suggestion\n- s\n").document.unwrap();
    let writing = promptlang::ScenarioName::parse("Writing").unwrap();
    let ctx = LintContext { scenario: Some(&writing), ..Default::default() };
    let found = lint_with(&doc, ctx, &builtin_matrix(), &LintConfig::default()).unwrap();
    assert_eq!(found.iter().map(|d| d.code).collect::<Vec<_>>(), ["P3-OFF-MATRIX"]);
}
