//! Command-line pipeline: generate a network, run disruption scenarios, report resilience.

pub mod error;
pub mod files;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use scdm_core::dmp::{assess, disruption_cause, orchestrate, AssessmentReport, RecoveryOutcome};
use scdm_core::metrics::{evaluate, ResilienceReport, ScenarioReport};
use scdm_core::ontology::{emit_views, Snapshot, Tier};
use scdm_core::queries;
use scdm_core::scenario::{build_snapshot, run_scenario, Format, ScenarioConfig, REFERENCE_SCENARIOS};
use scdm_kg::query::{evaluate_select, execute_insert, Query};
use serde::Serialize;

pub use error::{CliError, Result};
use files::{json_text, read_store, read_text, store_text, write_atomic};

#[derive(Debug, Parser)]
#[command(name = "scdm", version, about = "Supply-chain disruption scenarios on a knowledge graph")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the base store and its manifest.
    Generate(GenerateArgs),
    /// Generate, then assess, recover and evaluate every configured disruption.
    Run(RunArgs),
    /// Execute a query file against a store; SELECT results print as TSV.
    Query(QueryArgs),
    /// Mark the plans hit by one disruption.
    Assess(StageArgs),
    /// Recover the assessed plans of one disruption.
    Recover(RecoverArgs),
    /// Compute resilience metrics of a recovered store.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Scenario configuration (TOML); defaults to the bundled reference scenarios.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the generator seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Restricts the run to these disruption ids (repeatable).
    #[arg(long)]
    pub scenario: Vec<String>,
    /// Worker threads for scenarios.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub parallel: u16,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub query: PathBuf,
    /// Where to write the store after an INSERT; without it the result is discarded.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[arg(long)]
    pub store: PathBuf,
    /// Disruption id.
    #[arg(long)]
    pub scenario: String,
    /// Directory receiving the updated store and the stage log.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    /// Configuration providing the recovery policy.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub scenario: String,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Directory receiving the report files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
    Md,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Md => Format::Md,
        }
    }
}

pub const STORE_FILE: &str = "store.ttl";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const ASSESSMENT_FILE: &str = "assessment.json";
pub const ACTIONS_FILE: &str = "actions.json";
pub const REPORT_FILES: [&str; 4] = ["report_resilience.csv", "report_customers.csv", "report.json", "report.md"];

/// Parses arguments, runs the command and prints its output. Returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command; the returned text is meant for standard output.
pub fn execute(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Query(a) => cmd_query(&a),
        Command::Assess(a) => cmd_assess(&a),
        Command::Recover(a) => cmd_recover(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
    }
}

pub fn load_config(path: Option<&Path>, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut cfg = match path {
        Some(p) => ScenarioConfig::from_toml(&read_text(p)?).map_err(|e| CliError::Parse {
            path: p.to_path_buf(),
            source: e,
        })?,
        None => ScenarioConfig::from_toml(REFERENCE_SCENARIOS)?,
    };
    if let Some(s) = seed {
        cfg.generator.seed = s;
    }
    Ok(cfg)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    seed: u64,
    start_date: &'a str,
    horizon_days: i64,
    orders: usize,
    suppliers: usize,
    oems: usize,
    customers: usize,
    scenarios: Vec<&'a str>,
    files: Vec<String>,
    config: &'a ScenarioConfig,
}

fn manifest<'a>(cfg: &'a ScenarioConfig, snap: &Snapshot, files: Vec<String>) -> Manifest<'a> {
    let count = |t: Tier| snap.partners.iter().filter(|p| p.tier == t).count();
    Manifest {
        seed: cfg.generator.seed,
        start_date: &cfg.generator.start_date,
        horizon_days: cfg.generator.horizon_days,
        orders: snap.orders.len(),
        suppliers: count(Tier::Supplier),
        oems: count(Tier::Oem),
        customers: count(Tier::Customer),
        scenarios: cfg.disruptions.iter().map(|d| d.id.as_str()).collect(),
        files,
        config: cfg,
    }
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<String> {
    let cfg = load_config(a.cfg.config.as_deref(), a.cfg.seed)?;
    let snap = build_snapshot(&cfg)?;
    let store = emit_views(&snap)?;
    write_atomic(&a.out.join(STORE_FILE), &store_text(&store))?;
    let m = manifest(&cfg, &snap, vec![STORE_FILE.to_string()]);
    write_atomic(&a.out.join(MANIFEST_FILE), &json_text(&m))?;
    Ok(format!(
        "generated {} orders, {} disruptions into {}\n",
        m.orders,
        m.scenarios.len(),
        a.out.display()
    ))
}

fn scenario_dir(out: &Path, id: &str) -> PathBuf {
    out.join("scenarios").join(id)
}

fn render(report: &ResilienceReport, format: Format) -> String {
    match format {
        Format::Csv => format!("{}\n{}", report.resilience_csv(), report.customers_csv()),
        Format::Json => report.to_json(),
        Format::Md => report.to_markdown(),
    }
}

fn write_reports(dir: &Path, report: &ResilienceReport) -> Result<()> {
    let texts = [
        report.resilience_csv(),
        report.customers_csv(),
        report.to_json(),
        report.to_markdown(),
    ];
    for (name, text) in REPORT_FILES.iter().zip(texts) {
        write_atomic(&dir.join(name), &text)?;
    }
    Ok(())
}

pub fn cmd_run(a: &RunArgs) -> Result<String> {
    let full = load_config(a.cfg.config.as_deref(), a.cfg.seed)?;
    // The base store carries every configured disruption; the filter only picks which ones run.
    let snap = build_snapshot(&full)?;
    let base = emit_views(&snap)?;
    let mut cfg = full.clone();
    cfg.select(&a.scenario)?;
    let format = a.format.map(Format::from).unwrap_or(cfg.output.format);
    write_atomic(&a.out.join(STORE_FILE), &store_text(&base))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.parallel as usize)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    // Collect keeps declaration order whatever the completion order.
    let runs: Vec<Result<ScenarioReport>> = pool.install(|| {
        cfg.disruptions
            .par_iter()
            .map(|d| {
                let run = run_scenario(&base, &d.id, &cfg.policy)?;
                let dir = scenario_dir(&a.out, &d.id);
                write_atomic(&dir.join(ASSESSMENT_FILE), &json_text(&run.assessment))?;
                write_atomic(&dir.join(ACTIONS_FILE), &json_text(&run.outcome))?;
                if cfg.output.scenario_stores {
                    write_atomic(&dir.join(STORE_FILE), &store_text(&run.graph))?;
                }
                Ok(run.report)
            })
            .collect()
    });
    let report = ResilienceReport {
        scenarios: runs.into_iter().collect::<Result<_>>()?,
    };
    write_reports(&a.out, &report)?;

    let mut files = vec![STORE_FILE.to_string()];
    for d in &cfg.disruptions {
        let mut names = vec![ASSESSMENT_FILE, ACTIONS_FILE];
        if cfg.output.scenario_stores {
            names.push(STORE_FILE);
        }
        files.extend(names.iter().map(|n| format!("scenarios/{}/{n}", d.id)));
    }
    files.extend(REPORT_FILES.iter().map(|s| s.to_string()));
    write_atomic(&a.out.join(MANIFEST_FILE), &json_text(&manifest(&cfg, &snap, files)))?;
    Ok(render(&report, format))
}

pub fn cmd_query(a: &QueryArgs) -> Result<String> {
    let mut g = read_store(&a.store)?;
    let text = read_text(&a.query)?;
    let q = queries::parse(&text).map_err(|e| CliError::Parse {
        path: a.query.clone(),
        source: e,
    })?;
    match q {
        Query::Select(_) => {
            let s = evaluate_select(&g, &q).map_err(scdm_core::CoreError::from)?;
            Ok(s.to_tsv())
        }
        Query::InsertWhere(_) => {
            let outcome = execute_insert(&mut g, &q).map_err(scdm_core::CoreError::from)?;
            if let Some(out) = &a.out {
                write_atomic(out, &store_text(&g))?;
            }
            let mut s = format!("inserted\t{}\n", outcome.inserted);
            for d in outcome.diagnostics {
                let _ = writeln!(s, "# {d}");
            }
            Ok(s)
        }
    }
}

pub fn cmd_assess(a: &StageArgs) -> Result<String> {
    let mut g = read_store(&a.store)?;
    let report: AssessmentReport = assess(&mut g, &a.scenario)?;
    write_atomic(&a.out.join(STORE_FILE), &store_text(&g))?;
    write_atomic(&a.out.join(ASSESSMENT_FILE), &json_text(&report))?;
    Ok(format!(
        "{}: {} plans affected across {} partners\n",
        a.scenario,
        report.affected_plans.len(),
        report.affected_partners.len()
    ))
}

pub fn cmd_recover(a: &RecoverArgs) -> Result<String> {
    let cfg = load_config(a.config.as_deref(), None)?;
    let s = &a.stage;
    let mut g = read_store(&s.store)?;
    let outcome: RecoveryOutcome = orchestrate(&mut g, &s.scenario, &cfg.policy)?;
    write_atomic(&s.out.join(STORE_FILE), &store_text(&g))?;
    write_atomic(&s.out.join(ACTIONS_FILE), &json_text(&outcome))?;
    Ok(format!(
        "{}: {} plans recovered, {} not recovered, {} actions\n",
        s.scenario,
        outcome.recovered.len(),
        outcome.unrecovered.len(),
        outcome.actions.len()
    ))
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<String> {
    let g = read_store(&a.store)?;
    disruption_cause(&g, &a.scenario)?;
    let report = ResilienceReport {
        scenarios: vec![evaluate(&g, &a.scenario)?],
    };
    if let Some(dir) = &a.out {
        write_reports(dir, &report)?;
    }
    Ok(render(&report, a.format.map(Format::from).unwrap_or_default()))
}
