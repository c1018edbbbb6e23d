//! Parse + lint pipelines and the scaffolder, as used by the command line.

use std::path::Path;

use crate::diagnostic::{sort_diagnostics, Diagnostic, Severity};
use crate::lint::{lint_with, ConfigError, LintConfig, LintContext};
use crate::model::{Element, ModuleInstance, ModuleName, Procedure, ProcedureInput, PromptDocument};
use crate::parser::{detect_format, parse, Format, ParseResult};
use crate::registry::{DefinedModule, InherentModule, RegistryError, ScenarioMatrix, ScenarioName};
use crate::render::{render_json, render_markdown, reorder, ModuleOrder};
use crate::template::TemplateBindings;

#[derive(Debug, Clone, Default)]
pub struct CheckOptions<'a> {
    /// Forces the input format instead of sniffing it.
    pub format: Option<Format>,
    pub bindings: Option<&'a TemplateBindings>,
    pub scenario: Option<&'a ScenarioName>,
    pub file: Option<&'a Path>,
    /// Turns every warning into an error.
    pub strict: bool,
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub parse: ParseResult,
    /// Parse and lint findings together, in (file, line, column, code) order.
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckReport {
    pub fn has_errors(&self) -> bool {
        self.diagnostics.iter().any(Diagnostic::is_error)
    }
}

/// Parses `source` and, if that succeeds, lints the document.
pub fn check_source(
    source: &str,
    options: &CheckOptions<'_>,
    matrix: &ScenarioMatrix,
    config: &LintConfig,
) -> Result<CheckReport, ConfigError> {
    let parse = parse(source, detect_format(source, options.format));
    let mut diagnostics = parse.diagnostics.clone();
    if let Some(file) = options.file {
        diagnostics = diagnostics.into_iter().map(|d| d.with_file(file)).collect();
    }
    if let (Some(doc), Some(map)) = (&parse.document, &parse.source_map) {
        let ctx = LintContext {
            source_map: Some(map),
            bindings: options.bindings,
            file: options.file,
            scenario: options.scenario,
        };
        diagnostics.extend(lint_with(doc, ctx, matrix, config)?);
    }
    if options.strict {
        for d in &mut diagnostics {
            if d.severity == Severity::Warning {
                d.severity = Severity::Error;
            }
        }
    }
    sort_diagnostics(&mut diagnostics);
    Ok(CheckReport { parse, diagnostics })
}

/// Re-renders a source in its own format. Returns the parse diagnostics
/// when the source does not parse.
pub fn format_source(
    source: &str,
    format: Option<Format>,
    order: ModuleOrder,
    matrix: &ScenarioMatrix,
) -> Result<String, Vec<Diagnostic>> {
    let format = detect_format(source, format);
    let parsed = parse(source, format);
    let Some(doc) = parsed.document else {
        return Err(parsed.diagnostics);
    };
    let doc = reorder(&doc, order, matrix);
    Ok(match format {
        Format::Markdown => render_markdown(&doc),
        Format::Json => render_json(&doc),
    })
}

pub const FILL_ME: &str = "<FILL_ME>";

/// A skeleton document with every module defined for `scenario`, in
/// canonical order. Each module holds a `<FILL_ME>` bullet; Workflow gets a
/// one-step procedure instead.
pub fn scaffold(name: &str, scenario: &ScenarioName, matrix: &ScenarioMatrix) -> Result<PromptDocument, RegistryError> {
    let fill = || Element::freeform(FILL_ME).expect("placeholder bullet is valid");
    let mut modules = Vec::new();
    for defined in matrix.modules_for(scenario)? {
        let elements = match defined {
            DefinedModule::Inherent(InherentModule::Workflow) => vec![Element::Procedure(
                Procedure::new(
                    "Main task",
                    Some(ProcedureInput::new("input", FILL_ME).expect("valid input")),
                    vec![FILL_ME.to_string()],
                    Some(format!("the {FILL_ME}")),
                )
                .expect("valid procedure"),
            )],
            _ => vec![fill()],
        };
        let name = match defined {
            DefinedModule::Inherent(m) => ModuleName::Inherent(m),
            DefinedModule::Extension(e) => ModuleName::Extension(e),
        };
        modules.push(ModuleInstance::new(name, elements)?);
    }
    Ok(PromptDocument::new(name, Some(scenario.clone()), None, modules)?)
}
