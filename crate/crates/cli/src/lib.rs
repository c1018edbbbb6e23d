//! The `promptlang` command line.
//!
//! Exit codes: 0 success, 1 error diagnostics or an unmet precondition
//! (unbound placeholders, unresolvable bases), 2 usage or configuration
//! errors.

mod config;
mod files;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use promptlang::{
    builtin_matrix, check_source, explain_rule, format_source, instantiate, list_placeholders, parse, render_flat,
    render_json, render_markdown, scaffold, CheckOptions, Diagnostic, Format, LintConfig, ModuleOrder, PromptDocument,
    ScenarioMatrix, ScenarioName, Severity,
};
use rayon::prelude::*;
use thiserror::Error;

pub use config::{find_config, parse_config, CONFIG_FILE};
pub use files::{collect_inputs, label, sidecar_path, FileResolver};

pub const TEMPLATE_DIR_ENV: &str = "PROMPTLANG_TEMPLATE_DIR";

#[derive(Debug, Parser)]
#[command(name = "promptlang", version, about = "Parse, lint, format, compose and render structured prompts")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Registry file declaring extension modules and custom scenarios.
    #[arg(long, global = true, value_name = "FILE")]
    registry: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and lint prompt files or directories.
    Check(CheckArgs),
    /// Print (or rewrite) files in canonical form.
    Fmt(FmtArgs),
    /// Render a prompt as Markdown, JSON or flat text.
    Render(RenderArgs),
    /// Write a skeleton prompt for a scenario.
    New(NewArgs),
    /// List the placeholders of a prompt.
    Placeholders(PathArg),
    /// Resolve a prompt's `Extends` chain and print the merged prompt.
    Compose(ComposeArgs),
    /// Describe a rule code.
    Explain { code: String },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Md,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Md => Format::Markdown,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Canonical,
    Source,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TargetArg {
    Md,
    Json,
    Flat,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Input format for every file instead of sniffing it.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Treat warnings as errors; off-matrix modules become errors.
    #[arg(long)]
    strict: bool,
    /// Lint against this scenario instead of the declared one.
    #[arg(long)]
    scenario: Option<String>,
    /// Emit diagnostics as JSON lines on stderr.
    #[arg(long)]
    json_diagnostics: bool,
    /// Lint configuration file (default: nearest promptlang.toml).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Do not report unregistered extension modules.
    #[arg(long)]
    allow_adhoc: bool,
}

#[derive(Debug, Args)]
struct FmtArgs {
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Rewrite files in place instead of printing.
    #[arg(long)]
    write: bool,
    #[arg(long, value_enum, default_value = "source")]
    order: OrderArg,
}

#[derive(Debug, Args)]
struct TemplateDirs {
    /// Directory searched for `Extends` bases (repeatable). The
    /// PROMPTLANG_TEMPLATE_DIR variable adds more, separated like PATH.
    #[arg(long = "template-dir", value_name = "DIR")]
    dirs: Vec<PathBuf>,
}

impl TemplateDirs {
    fn all(&self) -> Vec<PathBuf> {
        let mut dirs = self.dirs.clone();
        if let Some(env) = std::env::var_os(TEMPLATE_DIR_ENV) {
            dirs.extend(std::env::split_paths(&env).filter(|p| !p.as_os_str().is_empty()));
        }
        dirs
    }
}

#[derive(Debug, Args)]
struct RenderArgs {
    path: PathBuf,
    #[arg(long, value_enum, default_value = "md")]
    to: TargetArg,
    /// Placeholder binding; overrides the sidecar file (repeatable).
    #[arg(long = "bind", value_name = "KEY=VALUE", value_parser = parse_binding)]
    bindings: Vec<(String, String)>,
    #[command(flatten)]
    templates: TemplateDirs,
    /// Write to this file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NewArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value = "Untitled prompt")]
    name: String,
    #[arg(long, value_enum, default_value = "md")]
    format: FormatArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PathArg {
    path: PathBuf,
}

#[derive(Debug, Args)]
struct ComposeArgs {
    path: PathBuf,
    #[command(flatten)]
    templates: TemplateDirs,
    #[arg(long, value_enum, default_value = "md")]
    to: FormatArg,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

fn parse_binding(s: &str) -> Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

#[derive(Debug, Error)]
enum Failure {
    /// Exit 1.
    #[error("{0}")]
    Failed(String),
    /// Exit 2.
    #[error("{0}")]
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Failed(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

type Outcome = Result<u8, Failure>;

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn out(&mut self, text: &str) -> Result<(), Failure> {
        self.out.write_all(text.as_bytes()).map_err(|e| Failure::Failed(e.to_string()))
    }

    fn err(&mut self, text: &str) {
        let _ = writeln!(self.err, "{text}");
    }
}

/// Runs the command line with `args` (including the program name) and
/// returns the exit code.
pub fn run_from_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                2
            } else {
                let _ = out.write_all(text.as_bytes());
                0
            };
        }
    };
    let mut io = Io { out, err };
    match run(cli, &mut io) {
        Ok(code) => code,
        Err(failure) => {
            io.err(&format!("error: {failure}"));
            failure.code()
        }
    }
}

fn run(cli: Cli, io: &mut Io<'_>) -> Outcome {
    let matrix = load_matrix(cli.registry.as_deref())?;
    match cli.command {
        Command::Check(args) => check(args, &matrix, io),
        Command::Fmt(args) => fmt(args, &matrix, io),
        Command::Render(args) => render(args, io),
        Command::New(args) => new(args, &matrix, io),
        Command::Placeholders(args) => placeholders(args, io),
        Command::Compose(args) => compose(args, io),
        Command::Explain { code } => match explain_rule(&code) {
            Ok(text) => io.out(&text).map(|_| 0),
            Err(e) => Err(Failure::Usage(e.to_string())),
        },
    }
}

fn load_matrix(path: Option<&Path>) -> Result<ScenarioMatrix, Failure> {
    let Some(path) = path else { return Ok(builtin_matrix()) };
    let source = files::read(path).map_err(Failure::Usage)?;
    ScenarioMatrix::from_registry_json(&source).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_output(io: &mut Io<'_>, out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => {
            write_atomically(path, text).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))?;
            Ok(0)
        }
        None => io.out(text).map(|_| 0),
    }
}

/// Writes through a temporary file in the same directory, then renames.
fn write_atomically(path: &Path, text: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Parses a file, printing its diagnostics; fails when it has errors.
fn load_document(path: &Path, io: &mut Io<'_>) -> Result<PromptDocument, Failure> {
    let source = files::read(path).map_err(Failure::Usage)?;
    let parsed = parse(&source, promptlang::detect_format(&source, Format::from_path(path)));
    let errors: Vec<&Diagnostic> = parsed.diagnostics.iter().filter(|d| d.is_error()).collect();
    for d in &errors {
        io.err(&(*d).clone().with_file(path).to_string());
    }
    parsed
        .document
        .ok_or_else(|| Failure::Failed(format!("{}: {} error(s); nothing done", path.display(), errors.len())))
}

fn check(args: CheckArgs, matrix: &ScenarioMatrix, io: &mut Io<'_>) -> Outcome {
    let cwd = std::env::current_dir().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut config: LintConfig = config::load_config(args.config.as_deref(), &cwd).map_err(Failure::Usage)?;
    config.allow_adhoc |= args.allow_adhoc;
    config.scenario_strict |= args.strict;
    let scenario =
        args.scenario.as_deref().map(ScenarioName::parse).transpose().map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(s) = &scenario {
        if !matrix.has_scenario(s) {
            return Err(Failure::Usage(unknown_scenario(s, matrix)));
        }
    }
    let inputs = collect_inputs(&args.paths).map_err(Failure::Usage)?;
    let format = args.format.map(Format::from);

    let results: Vec<Result<Vec<Diagnostic>, Failure>> = inputs
        .par_iter()
        .map(|path| {
            let source = files::read(path).map_err(Failure::Failed)?;
            let bindings = files::load_sidecar(path).map_err(Failure::Failed)?;
            let options = CheckOptions {
                format: format.or_else(|| Format::from_path(path)),
                bindings: bindings.as_ref(),
                scenario: scenario.as_ref(),
                file: Some(path),
                strict: args.strict,
            };
            check_source(&source, &options, matrix, &config)
                .map(|r| r.diagnostics)
                .map_err(|e| Failure::Usage(e.to_string()))
        })
        .collect();

    let (mut errors, mut warnings, mut failed) = (0, 0, false);
    for (path, result) in inputs.iter().zip(results) {
        let diagnostics = match result {
            Ok(d) => d,
            Err(Failure::Usage(msg)) => return Err(Failure::Usage(msg)),
            Err(Failure::Failed(msg)) => {
                io.err(&format!("{}: {msg}", path.display()));
                failed = true;
                continue;
            }
        };
        for d in diagnostics {
            match d.severity {
                Severity::Error => errors += 1,
                Severity::Warning => warnings += 1,
                Severity::Info => {}
            }
            io.err(&if args.json_diagnostics { d.to_json_line() } else { d.to_string() });
        }
    }
    if !args.json_diagnostics {
        io.err(&format!("checked {} file(s): {errors} error(s), {warnings} warning(s)", inputs.len()));
    }
    Ok(if errors > 0 || failed { 1 } else { 0 })
}

fn fmt(args: FmtArgs, matrix: &ScenarioMatrix, io: &mut Io<'_>) -> Outcome {
    let order = match args.order {
        OrderArg::Canonical => ModuleOrder::Canonical,
        OrderArg::Source => ModuleOrder::Source,
    };
    let inputs = collect_inputs(&args.paths).map_err(Failure::Usage)?;
    let mut code = 0;
    for path in &inputs {
        let source = files::read(path).map_err(Failure::Usage)?;
        match format_source(&source, Format::from_path(path), order, matrix) {
            Ok(text) if args.write => {
                if text != source {
                    write_atomically(path, &text).map_err(|e| Failure::Failed(format!("{}: {e}", path.display())))?;
                }
            }
            Ok(text) => io.out(&text)?,
            Err(diagnostics) => {
                for d in diagnostics.into_iter().filter(Diagnostic::is_error) {
                    io.err(&d.with_file(path).to_string());
                }
                io.err(&format!("{}: not formatted", path.display()));
                code = 1;
            }
        }
    }
    Ok(code)
}

/// The document with its `Extends` chain merged in, if it has one.
fn composed(path: &Path, doc: PromptDocument, templates: &TemplateDirs) -> Result<PromptDocument, Failure> {
    if doc.extends().is_none() {
        return Ok(doc);
    }
    files::compose_file(path, &doc, &templates.all()).map_err(|e| Failure::Failed(e.to_string()))
}

fn render(args: RenderArgs, io: &mut Io<'_>) -> Outcome {
    let doc = load_document(&args.path, io)?;
    let doc = composed(&args.path, doc, &args.templates)?;
    let mut bindings = files::load_sidecar(&args.path).map_err(Failure::Failed)?.unwrap_or_default();
    for (k, v) in args.bindings {
        bindings.insert(k, v).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let text = match args.to {
        TargetArg::Flat => render_flat(&doc, &bindings).map_err(|e| Failure::Failed(e.to_string()))?,
        target => {
            let doc = if bindings.is_empty() {
                doc
            } else {
                instantiate(&doc, &bindings).map_err(|e| Failure::Failed(e.to_string()))?.document
            };
            match target {
                TargetArg::Json => render_json(&doc),
                _ => render_markdown(&doc),
            }
        }
    };
    write_output(io, args.out.as_deref(), &text)
}

fn unknown_scenario(s: &ScenarioName, matrix: &ScenarioMatrix) -> String {
    let names: Vec<String> = matrix.scenarios().iter().map(ToString::to_string).collect();
    format!("unknown scenario `{s}`; expected one of: {}", names.join(", "))
}

fn new(args: NewArgs, matrix: &ScenarioMatrix, io: &mut Io<'_>) -> Outcome {
    let scenario = ScenarioName::parse(&args.scenario).map_err(|e| Failure::Usage(e.to_string()))?;
    if !matrix.has_scenario(&scenario) {
        return Err(Failure::Usage(unknown_scenario(&scenario, matrix)));
    }
    let doc = scaffold(&args.name, &scenario, matrix).map_err(|e| Failure::Usage(e.to_string()))?;
    let text = match args.format {
        FormatArg::Md => render_markdown(&doc),
        FormatArg::Json => render_json(&doc),
    };
    write_output(io, args.out.as_deref(), &text)
}

fn placeholders(args: PathArg, io: &mut Io<'_>) -> Outcome {
    let doc = load_document(&args.path, io)?;
    let mut text = String::new();
    for p in list_placeholders(&doc) {
        let mut modules: Vec<&str> = Vec::new();
        for o in &p.occurrences {
            if !modules.contains(&o.module_name.as_str()) {
                modules.push(&o.module_name);
            }
        }
        text.push_str(&format!("{} {} @ {}\n", p.name, p.occurrences.len(), modules.join(", ")));
    }
    io.out(&text).map(|_| 0)
}

fn compose(args: ComposeArgs, io: &mut Io<'_>) -> Outcome {
    let doc = load_document(&args.path, io)?;
    if doc.extends().is_none() {
        return Err(Failure::Failed(format!("{}: no `Extends:` base to compose", args.path.display())));
    }
    let doc = composed(&args.path, doc, &args.templates)?;
    let text = match args.to {
        FormatArg::Md => render_markdown(&doc),
        FormatArg::Json => render_json(&doc),
    };
    write_output(io, args.out.as_deref(), &text)
}
