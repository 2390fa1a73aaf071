mod config;
mod replicate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use ucmarket_core::analytics::{emit, summarize, RunSummary};
use ucmarket_core::learning::{run_simulation, IterationLog, JsonlSink, SimConfig};
use ucmarket_core::market_data::pglib::{import_path, ImportOptions};
use ucmarket_core::market_data::{IllustrativeScenario, MarketCase, DEFAULT_VOLL};
use ucmarket_core::pricing::PricingModel;
use ucmarket_core::uc::{backend_from_env, SolverBackend};
use ucmarket_core::Error;

use crate::config::RunConfig;

#[derive(Parser)]
#[command(name = "ucmarket", version, about = "Day-ahead unit-commitment market simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the learning simulation for one case.
    Run(RunArgs),
    /// Run a built-in illustrative scenario and compare with reference results.
    ReplicateIllustrative {
        /// T1_D1, T10_D1 or T10_D2.
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        iterations: usize,
        /// Also write full run outputs here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Convert a benchmark unit-commitment file into a case file.
    ImportFerc {
        /// Source JSON file, or a directory holding exactly one.
        source: PathBuf,
        /// Case file to write.
        out_file: PathBuf,
        /// Keep only the first N periods.
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_VOLL)]
        voll: f64,
        /// Case name; defaults to the source file stem.
        #[arg(long)]
        name: Option<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Case file (JSON).
    #[arg(long)]
    case: Option<PathBuf>,
    /// Built-in scenario instead of a case file.
    #[arg(long, conflicts_with = "case")]
    scenario: Option<String>,
    /// Pricing model; repeat for several. Defaults to both.
    #[arg(long = "model", value_parser = parse_model)]
    models: Vec<PricingModel>,
    /// Learning iterations.
    #[arg(long)]
    iterations: Option<usize>,
    /// Exploitation probability.
    #[arg(long)]
    alpha: Option<f64>,
    /// Price smoothing rate.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative MIP gap.
    #[arg(long)]
    gap: Option<f64>,
    /// Output directory; one subdirectory per model.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Iterations at the end of the run used for statistics.
    #[arg(long)]
    final_window: Option<usize>,
}

fn parse_model(s: &str) -> Result<PricingModel, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn into_config(self) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if self.case.is_some() {
            config.case = self.case;
            config.scenario = None;
        }
        if self.scenario.is_some() {
            config.scenario = self.scenario;
            config.case = None;
        }
        if !self.models.is_empty() {
            config.models = self.models;
        }
        let sim = &mut config.sim;
        if let Some(v) = self.iterations {
            sim.iterations = v;
        }
        if let Some(v) = self.alpha {
            sim.alpha = v;
        }
        if let Some(v) = self.eta {
            sim.eta = v;
        }
        if let Some(v) = self.seed {
            sim.seed = v;
        }
        if let Some(v) = self.gap {
            sim.rel_gap = v;
        }
        if let Some(v) = self.jobs {
            sim.jobs = v;
        }
        if self.out.is_some() {
            config.out = self.out;
        }
        if self.final_window.is_some() {
            config.final_window = self.final_window;
        }
        sim.validate()?;
        Ok(config)
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    case: &'a str,
    case_copy: &'a str,
    case_name: &'a str,
    config: &'a SimConfig,
    pricing_model: PricingModel,
    models_requested: &'a [PricingModel],
    final_window: usize,
    output_dir: &'a Path,
    artifact_version: &'static str,
    solver_backend: &'a str,
    started_unix: u64,
    elapsed_seconds: Option<f64>,
}

fn unix_now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

pub(crate) struct ModelRun {
    pub log: IterationLog,
    pub summary: RunSummary,
}

/// One full run for one pricing model: manifest, log, summary, tables, charts.
pub(crate) fn run_model(
    case: &MarketCase,
    case_label: &str,
    config: &RunConfig,
    model: PricingModel,
    dir: Option<&Path>,
    backend: &dyn SolverBackend,
) -> Result<ModelRun, Error> {
    let sim = SimConfig {
        pricing_model: model,
        ..config.sim.clone()
    };
    let models = config.models();
    let started = Instant::now();
    let started_unix = unix_now();
    let manifest = |elapsed: Option<f64>, dir| RunManifest {
        case: case_label,
        case_copy: "case.json",
        case_name: &case.name,
        config: &sim,
        pricing_model: model,
        models_requested: &models,
        final_window: config.final_window(),
        output_dir: dir,
        artifact_version: env!("CARGO_PKG_VERSION"),
        solver_backend: backend.name(),
        started_unix,
        elapsed_seconds: elapsed,
    };

    let mut sink = None;
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
        write_file(&dir.join("case.json"), &case.to_json_pretty())?;
        write_file(&dir.join("manifest.json"), &json(&manifest(None, dir)))?;
        sink = Some(JsonlSink::create(dir.join("log.jsonl"))?);
    }
    log::info!("{}: {} iterations, {model}", case.name, sim.iterations);
    let log = run_simulation(
        case,
        &sim,
        backend,
        sink.as_mut().map(|s| s as &mut dyn ucmarket_core::learning::IterationSink),
    )?;
    let summary = summarize(&log, case, config.final_window());
    if let Some(dir) = dir {
        emit(&summary, &log, case, dir)?;
        write_file(&dir.join("summary.json"), &json(&summary))?;
        let elapsed = started.elapsed().as_secs_f64();
        write_file(&dir.join("manifest.json"), &json(&manifest(Some(elapsed), dir)))?;
    }
    Ok(ModelRun { log, summary })
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let config = args.into_config()?;
    config.sim.validate()?;
    let (case, label) = config.resolve_case()?;
    let out = config.out.clone().unwrap_or_else(|| PathBuf::from("runs").join(&case.name));
    let backend = backend_from_env()?;
    let models = config.models();
    let run_one = |model: PricingModel| -> Result<(), Error> {
        let dir = out.join(model.name());
        let run = run_model(&case, &label, &config, model, Some(&dir), backend.as_ref())?;
        print_summary(model, &run.summary);
        println!("  outputs: {}", dir.display());
        Ok(())
    };
    if config.sim.jobs > 1 && models.len() > 1 {
        std::thread::scope(|scope| {
            let handles: Vec<_> = models.iter().map(|&m| scope.spawn(move || run_one(m))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("model run panicked"))
                .collect::<Result<Vec<_>, _>>()
        })?;
    } else {
        for model in models {
            run_one(model)?;
        }
    }
    Ok(())
}

fn print_summary(model: PricingModel, summary: &RunSummary) {
    println!("[{model}] {}", summary.case_name);
    for (group, c) in summary.adverse.by_group() {
        println!(
            "  {group:<8} adverse {} (self-commit {}, self-schedule {}, {} MW), strategic rate {:.1}%",
            c.unique,
            c.self_commit,
            c.self_schedule,
            c.unique_mw,
            100.0 * summary.strategic_rate.get(&group).copied().unwrap_or(0.0)
        );
    }
    println!("  excess profit {:.2}% of competitive profit", summary.excess_profit_pct);
}

fn cmd_import(source: &Path, out_file: &Path, horizon: Option<usize>, voll: f64, name: Option<String>) -> Result<(), Error> {
    let options = ImportOptions { horizon, voll, name };
    let case = import_path(source, &options)?;
    let thermal = case.thermal().count();
    case.save(out_file)?;
    println!(
        "{}: {} thermal ({:.1} MW), {} renewable, {} periods",
        out_file.display(),
        thermal,
        case.thermal_capacity(),
        case.generators.len() - thermal,
        case.horizon()
    );
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Solver(_) | Error::Consistency(_) => 2,
        Error::Io { .. } | Error::Csv(_) | Error::Chart(_) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::ReplicateIllustrative {
            scenario,
            seed,
            iterations,
            out,
            jobs,
        } => scenario
            .parse::<IllustrativeScenario>()
            .map_err(Error::Config)
            .and_then(|sc| replicate::run(sc, seed, iterations, out.as_deref(), jobs)),
        Command::ImportFerc {
            source,
            out_file,
            horizon,
            voll,
            name,
        } => cmd_import(&source, &out_file, horizon, voll, name),
    };
    match result.context("ucmarket") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            // causes already spelled out by their parent are skipped
            let mut msg = String::new();
            for cause in e.chain() {
                let text = cause.to_string();
                if !msg.contains(&text) {
                    if !msg.is_empty() {
                        msg.push_str(": ");
                    }
                    msg.push_str(&text);
                }
            }
            eprintln!("error: {msg}");
            let code = e.downcast_ref::<Error>().map_or(1, exit_code);
            ExitCode::from(code)
        }
    }
}
