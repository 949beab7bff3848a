//! The `pdgen` command line: parse, validate, plan, check, generate,
//! evaluate, verify and scaffold.
//!
//! [`run`] takes the argument list, a [`Transport`] for live and record
//! modes, and the two output streams, and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use pdgen_core::backends::{build_backend, BackendConfig, BackendMode, Transport};
use pdgen_core::dataset::{
    blocksworld_knowledge, generate_blocksworld_case, generate_hanoi_case, hanoi_knowledge, load_bundle,
    shipped_bundle_dir, verify_bundle, write_bundle, DomainBundle,
};
use pdgen_core::metrics::{evaluate_batch, render_table, EvalItem};
use pdgen_core::pddl::{parse_domain, parse_plan, parse_problem, print_domain, print_problem, Domain, Problem};
use pdgen_core::pipeline::{GenerationInput, GenerationMode, GenerationRecord, Pipeline, PipelineConfig, SceneInput, Templates};
use pdgen_core::planner::{plan, render_planner_error, validate_plan, Algorithm, Heuristic, Outcome, SearchConfig};
use pdgen_core::validator::{render_error, validate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_UNSOLVABLE: i32 = 2;
pub const EXIT_TIMEOUT: i32 = 3;
pub const EXIT_USAGE: i32 = 4;

/// Version of the `--output structured` documents.
pub const OUTPUT_SCHEMA_VERSION: u32 = 1;

const RECORD_SUFFIX: &str = ".record.json";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Human,
    Structured,
}

#[derive(Debug, Parser)]
#[command(name = "pdgen", version, about = "Generate, check and score PDDL problem descriptions")]
pub struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Human)]
    pub output: OutputFormat,
    /// Print nothing on success.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// More log output; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// TOML file with [backend], [pipeline] and [search] tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the backend mode from the config file.
    #[arg(long, global = true, value_parser = parse_mode)]
    pub backend_mode: Option<BackendMode>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a domain or problem file and print its canonical form.
    Parse { file: PathBuf },
    /// Statically check a problem against its domain.
    Validate { domain: PathBuf, problem: PathBuf },
    /// Search for a plan.
    Plan {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
        /// Also write the plan here.
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Check a plan file by simulation.
    Check { domain: PathBuf, problem: PathBuf, plan: PathBuf },
    /// Generate a problem for one case of a bundle.
    Generate(GenerateArgs),
    /// Score generation records against a bundle's ground truths.
    Evaluate {
        bundle: PathBuf,
        records: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check that every case of a bundle validates, solves and matches its scene.
    Verify {
        bundle: PathBuf,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Write a bundle of generated Blocksworld or Hanoi cases.
    Scaffold {
        #[arg(value_enum)]
        domain: ScaffoldDomain,
        /// Blocks or disks per case.
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        cases: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaffoldDomain {
    Blocksworld,
    Hanoi,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SearchArgs {
    #[arg(long, value_parser = parse_algorithm)]
    pub algorithm: Option<Algorithm>,
    #[arg(long, value_parser = parse_heuristic)]
    pub heuristic: Option<Heuristic>,
    /// For example `500ms`, `10s` or `2m`.
    #[arg(long, value_parser = parse_timeout)]
    pub timeout: Option<Duration>,
    #[arg(long)]
    pub max_expansions: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneSource {
    /// Run the detector and captioner on the case image.
    Image,
    /// Use the case annotation's detections and captions directly.
    Annotation,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub bundle: PathBuf,
    pub case_id: String,
    /// Directory for `<case>.record.json` and `<case>.pddl`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub no_cot: bool,
    #[arg(long)]
    pub max_corrections: Option<usize>,
    #[arg(long)]
    pub examples: Option<usize>,
    #[arg(long)]
    pub combination_index: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = SceneSource::Image)]
    pub scene: SceneSource,
    /// Defaults to `<bundle>/fixtures` in replay and record modes.
    #[arg(long)]
    pub fixture_dir: Option<PathBuf>,
    #[arg(long)]
    pub endpoint: Option<String>,
    /// Environment variable holding the API token.
    #[arg(long)]
    pub auth_env: Option<String>,
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Directory of prompt templates overriding the built-in ones.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Modular,
    Whole,
}

fn parse_mode(s: &str) -> Result<BackendMode, String> {
    s.parse().map_err(|e: pdgen_core::backends::BackendError| e.to_string())
}

fn from_word<T: serde::de::DeserializeOwned>(s: &str, what: &str) -> Result<T, String> {
    serde_json::from_value(json!(s)).map_err(|_| format!("unknown {what} `{s}`"))
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    from_word(s, "algorithm")
}

fn parse_heuristic(s: &str) -> Result<Heuristic, String> {
    from_word(s, "heuristic")
}

fn parse_timeout(s: &str) -> Result<Duration, String> {
    humantime::parse_duration(s).map_err(|e| e.to_string())
}

/// Contents of the `--config` file. Every table is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub backend: BackendConfig,
    pub pipeline: PipelineConfig,
    /// Used by every command that searches, including generation.
    pub search: SearchConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read(path)?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

impl SearchArgs {
    fn apply(&self, mut cfg: SearchConfig) -> SearchConfig {
        if let Some(a) = self.algorithm {
            cfg.algorithm = a;
        }
        if let Some(h) = self.heuristic {
            cfg.heuristic = h;
        }
        if let Some(t) = self.timeout {
            cfg.timeout = t;
        }
        if let Some(m) = self.max_expansions {
            cfg.max_expansions = m;
        }
        cfg
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    fn code(&self) -> i32 {
        EXIT_USAGE
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io)?;
    }
    std::fs::write(path, text).map_err(io)
}

struct Ctx<'a> {
    format: OutputFormat,
    quiet: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn human(&mut self, text: &str) {
        if self.format == OutputFormat::Human && !self.quiet && !text.is_empty() {
            let _ = write!(self.out, "{text}");
            if !text.ends_with('\n') {
                let _ = writeln!(self.out);
            }
        }
    }

    /// Like `human`, but printed even in quiet mode.
    fn report(&mut self, text: &str) {
        if self.format == OutputFormat::Human {
            let _ = writeln!(self.out, "{}", text.trim_end());
        }
    }

    fn structured(&mut self, command: &str, body: serde_json::Value) {
        if self.format == OutputFormat::Structured {
            let mut doc = json!({"schema_version": OUTPUT_SCHEMA_VERSION, "command": command});
            if let (Some(d), serde_json::Value::Object(b)) = (doc.as_object_mut(), body) {
                d.extend(b);
            }
            let _ = writeln!(self.out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
    }

    fn error(&mut self, msg: &str) {
        let _ = writeln!(self.err, "error: {msg}");
    }
}

/// Runs the CLI and returns the exit code.
pub fn run<I, T>(args: I, transport: Arc<dyn Transport>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let mut ctx = Ctx {
        format: cli.output,
        quiet: cli.quiet,
        out,
        err,
    };
    let file = match cli.config.as_deref().map(FileConfig::load).transpose() {
        Ok(f) => f.unwrap_or_default(),
        Err(e) => {
            ctx.error(&e.to_string());
            return e.code();
        }
    };
    let result = match &cli.command {
        Command::Parse { file: path } => cmd_parse(&mut ctx, path),
        Command::Validate { domain, problem } => cmd_validate(&mut ctx, domain, problem),
        Command::Plan {
            domain,
            problem,
            search,
            plan_out,
        } => cmd_plan(&mut ctx, domain, problem, &search.apply(file.search.clone()), plan_out.as_deref()),
        Command::Check { domain, problem, plan } => cmd_check(&mut ctx, domain, problem, plan),
        Command::Generate(args) => cmd_generate(&mut ctx, args, &file, cli.backend_mode, transport),
        Command::Evaluate { bundle, records, search } => {
            cmd_evaluate(&mut ctx, bundle, records, &search.apply(file.search.clone()))
        }
        Command::Verify { bundle, search } => cmd_verify(&mut ctx, bundle, &search.apply(file.search.clone())),
        Command::Scaffold {
            domain,
            size,
            cases,
            seed,
            out,
        } => cmd_scaffold(&mut ctx, *domain, *size, *cases, *seed, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            ctx.error(&e.to_string());
            e.code()
        }
    }
}

fn load_domain(path: &Path) -> Result<Result<Domain, String>, CliError> {
    Ok(parse_domain(&read(path)?).map_err(|e| format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<Result<Problem, String>, CliError> {
    Ok(parse_problem(&read(path)?).map_err(|e| format!("{}: {e}", path.display())))
}

/// Loads both files; a parse error is reported and mapped to exit 1.
fn load_pair(ctx: &mut Ctx, command: &str, domain: &Path, problem: &Path) -> Result<Result<(Domain, Problem), i32>, CliError> {
    let d = load_domain(domain)?;
    let p = load_problem(problem)?;
    match (d, p) {
        (Ok(d), Ok(p)) => Ok(Ok((d, p))),
        (Err(e), _) | (_, Err(e)) => {
            ctx.structured(command, json!({"ok": false, "parse_error": e}));
            ctx.report(&format!("ParseError: {e}"));
            Ok(Err(EXIT_FAILURE))
        }
    }
}

fn cmd_parse(ctx: &mut Ctx, path: &Path) -> Result<i32, CliError> {
    let text = read(path)?;
    let is_problem = text.contains("(problem");
    let printed = if is_problem {
        parse_problem(&text).map(|p| print_problem(&p))
    } else {
        parse_domain(&text).map(|d| print_domain(&d))
    };
    let kind = if is_problem { "problem" } else { "domain" };
    match printed {
        Ok(t) => {
            ctx.human(&t);
            ctx.structured("parse", json!({"ok": true, "kind": kind, "text": t}));
            Ok(EXIT_OK)
        }
        Err(e) => {
            let msg = format!("{}: {e}", path.display());
            ctx.structured("parse", json!({"ok": false, "kind": kind, "parse_error": msg}));
            ctx.report(&format!("ParseError: {msg}"));
            Ok(EXIT_FAILURE)
        }
    }
}

fn cmd_validate(ctx: &mut Ctx, domain: &Path, problem: &Path) -> Result<i32, CliError> {
    let (d, p) = match load_pair(ctx, "validate", domain, problem)? {
        Ok(pair) => pair,
        Err(code) => return Ok(code),
    };
    let report = validate(&d, &p);
    ctx.structured("validate", json!({ "report": report }));
    if report.ok() {
        ctx.human("ok");
        Ok(EXIT_OK)
    } else {
        ctx.report(&render_error(&report).expect("has issues"));
        Ok(EXIT_FAILURE)
    }
}

fn cmd_plan(ctx: &mut Ctx, domain: &Path, problem: &Path, search: &SearchConfig, plan_out: Option<&Path>) -> Result<i32, CliError> {
    search.check().map_err(|e| CliError::Usage(e.to_string()))?;
    let (d, p) = match load_pair(ctx, "plan", domain, problem)? {
        Ok(pair) => pair,
        Err(code) => return Ok(code),
    };
    let report = validate(&d, &p);
    if !report.ok() {
        ctx.structured("plan", json!({ "report": report }));
        ctx.report(&render_error(&report).expect("has issues"));
        return Ok(EXIT_FAILURE);
    }
    let result = plan(&d, &p, search).map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.structured("plan", json!({ "result": result }));
    let code = match &result.outcome {
        Outcome::Solved(found) => {
            let text = found.to_string();
            if let Some(path) = plan_out {
                write_file(path, &text)?;
            }
            if found.is_empty() {
                ctx.human("; goal already holds");
            } else {
                ctx.human(&text);
            }
            return Ok(EXIT_OK);
        }
        Outcome::Unsolvable { .. } => EXIT_UNSOLVABLE,
        Outcome::Timeout { .. } | Outcome::ExpansionLimit { .. } => EXIT_TIMEOUT,
    };
    ctx.report(&render_planner_error(&result).expect("not solved"));
    Ok(code)
}

fn cmd_check(ctx: &mut Ctx, domain: &Path, problem: &Path, plan_path: &Path) -> Result<i32, CliError> {
    let (d, p) = match load_pair(ctx, "check", domain, problem)? {
        Ok(pair) => pair,
        Err(code) => return Ok(code),
    };
    let found = match parse_plan(&read(plan_path)?) {
        Ok(found) => found,
        Err(e) => {
            let msg = format!("{}: {e}", plan_path.display());
            ctx.structured("check", json!({"valid": false, "error": msg}));
            ctx.report(&format!("ParseError: {msg}"));
            return Ok(EXIT_FAILURE);
        }
    };
    let report = validate(&d, &p);
    if !report.ok() {
        ctx.structured("check", json!({"valid": false, "report": report}));
        ctx.report(&render_error(&report).expect("has issues"));
        return Ok(EXIT_FAILURE);
    }
    match validate_plan(&d, &p, &found) {
        Ok(v) => {
            ctx.structured("check", json!({"valid": v.is_valid(), "result": v}));
            if v.is_valid() {
                ctx.human(&v.to_string());
                Ok(EXIT_OK)
            } else {
                ctx.report(&v.to_string());
                Ok(EXIT_FAILURE)
            }
        }
        Err(e) => {
            ctx.structured("check", json!({"valid": false, "error": e.to_string()}));
            ctx.report(&e.to_string());
            Ok(EXIT_FAILURE)
        }
    }
}

fn load_bundle_cli(dir: &Path) -> Result<DomainBundle, CliError> {
    load_bundle(dir).map_err(|e| CliError::Usage(e.to_string()))
}

fn pipeline_config(args: &GenerateArgs, file: &FileConfig) -> PipelineConfig {
    let mut cfg = file.pipeline.clone();
    cfg.search = args.search.apply(file.search.clone());
    if let Some(m) = args.mode {
        cfg.mode = match m {
            Mode::Modular => GenerationMode::Modular,
            Mode::Whole => GenerationMode::Whole,
        };
    }
    if args.no_cot {
        cfg.use_cot = false;
    }
    if let Some(n) = args.max_corrections {
        cfg.max_corrections = n;
    }
    if let Some(k) = args.examples {
        cfg.k_examples = k;
    }
    if args.combination_index.is_some() {
        cfg.combination_index = args.combination_index;
    }
    if let Some(s) = args.seed {
        cfg.example_selector_seed = s;
    }
    cfg
}

fn backend_config(args: &GenerateArgs, file: &FileConfig, mode: Option<BackendMode>) -> BackendConfig {
    let mut cfg = file.backend.clone();
    if let Some(m) = mode {
        cfg.mode = m;
    }
    if args.endpoint.is_some() {
        cfg.endpoint = args.endpoint.clone();
    }
    if args.auth_env.is_some() {
        cfg.auth_env = args.auth_env.clone();
    }
    if args.script.is_some() {
        cfg.script = args.script.clone();
    }
    if args.fixture_dir.is_some() {
        cfg.fixture_dir = args.fixture_dir.clone();
    }
    if cfg.fixture_dir.is_none() && matches!(cfg.mode, BackendMode::Replay | BackendMode::Record) {
        cfg.fixture_dir = Some(args.bundle.join("fixtures"));
    }
    cfg
}

fn cmd_generate(
    ctx: &mut Ctx,
    args: &GenerateArgs,
    file: &FileConfig,
    mode: Option<BackendMode>,
    transport: Arc<dyn Transport>,
) -> Result<i32, CliError> {
    let bundle = load_bundle_cli(&args.bundle)?;
    let case = bundle
        .case(&args.case_id)
        .ok_or_else(|| CliError::Usage(format!("case `{}` is not in {}", args.case_id, args.bundle.display())))?;
    let pool = bundle.example_pool().map_err(|e| CliError::Usage(e.to_string()))?;
    let config = pipeline_config(args, file);
    let backend = build_backend(&backend_config(args, file, mode), transport).map_err(|e| CliError::Usage(e.to_string()))?;
    let templates = match &args.templates {
        Some(dir) => Templates::with_overrides(dir).map_err(|e| CliError::Usage(e.to_string()))?,
        None => Templates::default(),
    };
    let pipeline = Pipeline {
        backend: backend.as_ref(),
        templates: &templates,
        config: &config,
        domain: &bundle.domain,
        knowledge: &bundle.knowledge,
    };
    let input = GenerationInput {
        case_id: case.id.clone(),
        instruction: case.instruction.clone(),
        scene: match args.scene {
            SceneSource::Image => SceneInput::image_of(&case.scene),
            SceneSource::Annotation => SceneInput::Annotation(case.scene.clone()),
        },
    };
    let record = pipeline.generate(&input, &pool);
    let record_path = args.out.join(format!("{}{RECORD_SUFFIX}", case.id));
    write_file(&record_path, &record.to_json())?;
    if let Some(text) = record.final_text() {
        write_file(&args.out.join(format!("{}.pddl", case.id)), text)?;
    }
    ctx.structured(
        "generate",
        json!({
            "case_id": case.id,
            "success": record.success,
            "attempts": record.attempts.len(),
            "record": record_path,
            "error": record.error,
        }),
    );
    if let Some(e) = &record.error {
        ctx.error(e);
        return Ok(if record.backend_failure { EXIT_TIMEOUT } else { EXIT_FAILURE });
    }
    let summary = format!(
        "{}: {} after {} attempt(s); record written to {}",
        case.id,
        if record.success { "success" } else { "failed" },
        record.attempts.len(),
        record_path.display()
    );
    if record.success {
        ctx.human(&summary);
        Ok(EXIT_OK)
    } else {
        ctx.report(&summary);
        if let Some(msg) = record.attempts.last().and_then(|a| a.error_message.as_deref()) {
            ctx.report(msg);
        }
        Ok(EXIT_FAILURE)
    }
}

/// Reads every `*.record.json` in `dir`, sorted by file name.
pub fn load_records(dir: &Path) -> Result<Vec<GenerationRecord>, CliError> {
    let entries = std::fs::read_dir(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.to_string_lossy().ends_with(RECORD_SUFFIX))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| serde_json::from_str(&read(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))))
        .collect()
}

fn cmd_evaluate(ctx: &mut Ctx, bundle_dir: &Path, records_dir: &Path, search: &SearchConfig) -> Result<i32, CliError> {
    let bundle = load_bundle_cli(bundle_dir)?;
    let records = load_records(records_dir)?;
    if records.is_empty() {
        return Err(CliError::Usage(format!("no records in {}", records_dir.display())));
    }
    let mut items = Vec::with_capacity(records.len());
    for r in &records {
        let case = bundle
            .case(&r.input.case_id)
            .ok_or_else(|| CliError::Usage(format!("record for unknown case `{}`", r.input.case_id)))?;
        items.push(EvalItem::from_record(r, case.ground_truth.clone(), bundle.domain.clone()));
    }
    let report = evaluate_batch(&items, search).map_err(|e| CliError::Usage(e.to_string()))?;
    let label = bundle.domain.name.to_string();
    ctx.report(&render_table(&[(label.as_str(), &report)]));
    ctx.structured("evaluate", json!({ "report": report }));
    Ok(EXIT_OK)
}

fn cmd_verify(ctx: &mut Ctx, bundle_dir: &Path, search: &SearchConfig) -> Result<i32, CliError> {
    let bundle = load_bundle_cli(bundle_dir)?;
    let report = verify_bundle(&bundle, search);
    ctx.structured("verify", json!({ "report": report }));
    for w in &report.warnings {
        let _ = writeln!(ctx.err, "warning: {w}");
    }
    if report.ok() {
        ctx.human(&format!("{} case(s) verified", report.checked));
        Ok(EXIT_OK)
    } else {
        for f in &report.failures {
            ctx.report(&format!("{}: {}", f.case_id, f.reason));
        }
        Ok(EXIT_FAILURE)
    }
}

fn cmd_scaffold(ctx: &mut Ctx, domain: ScaffoldDomain, size: usize, cases: u64, seed: u64, out: &Path) -> Result<i32, CliError> {
    if cases == 0 {
        return Err(CliError::Usage("--cases must be at least 1".into()));
    }
    let (name, mut knowledge) = match domain {
        ScaffoldDomain::Blocksworld => ("blocksworld", blocksworld_knowledge()),
        ScaffoldDomain::Hanoi => ("hanoi", hanoi_knowledge()),
    };
    let shipped = load_bundle_cli(&shipped_bundle_dir(name))?;
    let generated: Result<Vec<_>, _> = (0..cases)
        .map(|i| match domain {
            ScaffoldDomain::Blocksworld => generate_blocksworld_case(size, seed + i),
            ScaffoldDomain::Hanoi => generate_hanoi_case(size, 3, seed + i),
        })
        .collect();
    let generated = generated.map_err(|e| CliError::Usage(e.to_string()))?;
    knowledge.example_pool = generated.iter().map(|c| c.id.clone()).collect();
    let bundle = DomainBundle {
        domain: shipped.domain,
        knowledge,
        cases: generated,
        examples: Vec::new(),
    };
    if out.join("problems").exists() {
        return Err(CliError::Usage(format!("{} already holds a bundle", out.display())));
    }
    write_bundle(out, &bundle).map_err(|e| CliError::Usage(e.to_string()))?;
    ctx.structured("scaffold", json!({"domain": name, "cases": bundle.knowledge.example_pool, "out": out}));
    ctx.human(&format!("wrote {} {name} case(s) to {}", cases, out.display()));
    Ok(EXIT_OK)
}
