mod support;

use promptlang::lint::LintConfig;
use promptlang::render::{render_markdown_mapped, reorder};
use promptlang::{
    builtin_matrix, format_source, lint, parse, parse_json, parse_markdown, render_json, render_markdown,
    scan_placeholders, substitute_placeholders, Format, ModuleOrder, Severity,
};
use proptest::prelude::*;

fn no_errors(diags: &[promptlang::Diagnostic]) -> bool {
    diags.iter().all(|d| d.severity != Severity::Error)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn markdown_round_trip(doc in support::document()) {
        let text = render_markdown(&doc);
        let parsed = parse_markdown(&text);
        prop_assert!(no_errors(&parsed.diagnostics), "{:?}\n{}", parsed.diagnostics, text);
        let back = parsed.document.unwrap();
        prop_assert_eq!(support::project(&back), support::project(&doc));
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(render_markdown(&back), text);
    }

    #[test]
    fn json_round_trip(doc in support::document()) {
        let text = render_json(&doc);
        let parsed = parse_json(&text);
        prop_assert!(no_errors(&parsed.diagnostics), "{:?}", parsed.diagnostics);
        let back = parsed.document.unwrap();
        prop_assert_eq!(support::project(&back), support::project(&doc));
        prop_assert_eq!(render_json(&back), text);
    }

    #[test]
    fn cross_format(doc in support::document()) {
        let from_md = parse_markdown(&render_markdown(&doc)).document.unwrap();
        let from_json = parse_json(&render_json(&doc)).document.unwrap();
        prop_assert_eq!(support::project(&from_md), support::project(&from_json));
    }

    #[test]
    fn source_map_points_at_text(doc in support::document()) {
        let text = render_markdown(&doc);
        let parsed = parse_markdown(&text);
        let map = parsed.source_map.unwrap();
        // the renderer's own map must agree with the parser's
        prop_assert_eq!(&render_markdown_mapped(&doc).1, &map);
        let lines: Vec<&str> = text.lines().collect();
        for (mi, module) in doc.modules().iter().enumerate() {
            for (ei, element) in module.elements().iter().enumerate() {
                for (part, expected) in element.parts() {
                    let ts = map.part(mi, ei, part);
                    prop_assert!(ts.exact);
                    let line = lines[ts.span.line - 1];
                    let got: String = line.chars().skip(ts.span.column - 1).take(ts.span.length).collect();
                    prop_assert_eq!(got, expected);
                }
            }
        }
    }

    #[test]
    fn canonical_order_clears_order_finding(doc in support::document()) {
        let sorted = reorder(&doc, ModuleOrder::Canonical, &builtin_matrix());
        let findings = lint(&sorted, &builtin_matrix(), &LintConfig::default()).unwrap();
        prop_assert!(findings.iter().all(|d| d.code != "P1-NONCANON-ORDER"));
        // reordering is a permutation
        prop_assert_eq!(sorted.modules().len(), doc.modules().len());
    }

    #[test]
    fn parse_is_deterministic(doc in support::document()) {
        let text = render_markdown(&doc);
        prop_assert_eq!(parse_markdown(&text), parse_markdown(&text));
    }

    #[test]
    fn parsers_never_panic(src in "(#|##|###|- |  - |Scenario: |Extends: |\\{|\\}|\"|:|,|\\[|\\]|\n|[a-zA-Z <>\\\\]){0,60}") {
        let _ = parse_markdown(&src);
        let _ = parse_json(&src);
    }

    #[test]
    fn scan_matches_brute_force(text in "([A-Z_<>\\\\a1 ]|<[A-Z][A-Z0-9_]{0,3}>|\\\\<[A-Z]>){0,24}") {
        let found: Vec<(String, usize)> =
            scan_placeholders(&text).into_iter().map(|t| (t.name, t.span.column)).collect();
        prop_assert_eq!(found, support::brute_force_placeholders(&text));
    }

    #[test]
    fn scan_is_stable_under_empty_substitution(text in "([A-Z_<>\\\\a ]|<[A-Z]{1,3}>){0,24}") {
        let same = substitute_placeholders(&text, |_| None);
        prop_assert_eq!(&same, &text);
        prop_assert_eq!(scan_placeholders(&same), scan_placeholders(&text));
    }
}

#[test]
fn minimal_documents() {
    let parsed = parse_markdown("# T");
    let doc = parsed.document.unwrap();
    assert_eq!(doc.name(), "T");
    assert!(doc.modules().is_empty());
    assert_eq!(parsed.diagnostics.len(), 1);
    assert_eq!(parsed.diagnostics[0].severity, Severity::Warning);
    assert_eq!(render_markdown(&doc), "# T\n");

    let json = parse_json(r#"{"name":"T","scenario":null,"extends":null,"modules":[]}"#);
    let codes: Vec<_> = json.diagnostics.iter().map(|d| d.code).collect();
    assert_eq!(codes, ["P1-EMPTY-BODY"]);
    assert_eq!(json.document.unwrap(), doc);
}

#[test]
fn json_rejects_unknown_inherent_module() {
    let src = r#"{"name":"T","modules":[{"kind":"inherent","name":"NoSuchModule","elements":[{"type":"freeform","text":"x"}]}]}"#;
    let parsed = parse_json(src);
    assert!(parsed.has_errors());
    assert!(parsed.document.is_none());
    assert_eq!(parsed.diagnostics[0].code, "P1-JSON-SCHEMA");
}

#[test]
fn short_examples_parse() {
    let src = "# Editor\n\n## Profile\n- You are a magazine editor.\n\n## Constraint\n- The length of the title should not exceed 20 words.\n";
    let doc = parse_markdown(src).document.unwrap();
    assert_eq!(doc.modules().len(), 2);
    assert!(doc.modules().iter().all(|m| m.elements().len() == 1));
}

/// Every fixture that parses is a fixed point of `fmt` after one pass.
#[test]
fn fmt_idempotent_on_fixture_corpus() {
    let matrix = builtin_matrix();
    let mut checked = 0;
    for entry in walk(&support::fixture_dir()) {
        let source = std::fs::read_to_string(&entry).unwrap();
        let format = Format::from_path(&entry);
        for order in [ModuleOrder::Source, ModuleOrder::Canonical] {
            let Ok(once) = format_source(&source, format, order, &matrix) else { continue };
            let twice = format_source(&once, format, order, &matrix).unwrap();
            assert_eq!(once, twice, "{}", entry.display());
            checked += 1;
        }
        let parsed = parse(&source, format.unwrap_or(Format::Markdown));
        if let Some(doc) = parsed.document {
            let canonical = match format {
                Some(Format::Json) => render_json(&doc),
                _ => render_markdown(&doc),
            };
            assert_eq!(format_source(&source, format, ModuleOrder::Source, &matrix).unwrap(), canonical);
        }
    }
    assert!(checked >= 40, "only {checked} fixture passes");
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(walk(&path));
        } else {
            out.push(path);
        }
    }
    out.sort();
    out
}
