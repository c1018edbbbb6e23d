//! Structured prompts made of modules and elements: a data model, a
//! Markdown dialect and JSON form, a linter, templating and composition.
//!
//! ```
//! use promptlang::{builtin_matrix, lint, parse_markdown, render_markdown, LintConfig};
//!
//! let source = "# Greeter\n\n## Profile\n- You are polite.\n\n## Goal\n- Greet <NAME>.\n";
//! let parsed = parse_markdown(source);
//! let doc = parsed.document.expect("valid document");
//! assert_eq!(render_markdown(&doc), source);
//!
//! let findings = lint(&doc, &builtin_matrix(), &LintConfig::default()).unwrap();
//! assert_eq!(findings[0].code, "P3-UNBOUND-PLACEHOLDER");
//! ```

pub mod check;
pub mod diagnostic;
pub mod lint;
pub mod model;
pub mod parser;
pub mod registry;
pub mod render;
pub mod rules;
pub mod template;

pub use check::{check_source, format_source, scaffold, CheckOptions, CheckReport};
pub use diagnostic::{Diagnostic, Severity};
pub use lint::{lint, lint_with, ConfigError, LintConfig, LintContext};
pub use model::{
    classify_element_line, scan_placeholders, substitute_placeholders, Element, ElementPart, ModelError,
    ModuleInstance, ModuleKind, ModuleName, PlaceholderToken, Procedure, ProcedureInput, PromptDocument, Span,
};
pub use parser::{detect_format, parse, parse_json, parse_markdown, Format, ParseResult, SourceMap};
pub use registry::{
    builtin_matrix, BuiltinScenario, ExtensionModuleDecl, InherentModule, RegistryError, ScenarioMatrix, ScenarioName,
    ScenarioScope,
};
pub use render::{
    render, render_flat, render_json, render_markdown, render_markdown_mapped, ModuleOrder, RenderError, RenderOptions,
    RenderTarget,
};
pub use rules::{explain_rule, UnknownRule};
pub use template::{
    compose, instantiate, list_placeholders, ComposeError, Instantiated, Placeholder, Resolved, Resolver,
    TemplateBindings,
};
