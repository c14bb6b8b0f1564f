use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use epichart::runner::{self, RunError};
use epichart::scenario::{ModelPack, ScenarioConfig};
use epichart::statechart::ChartSet;
use epichart::{pertussis, varicella};

#[derive(Parser)]
#[command(
    name = "epichart",
    version,
    about = "Statechart agent-based epidemic simulations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario ensemble and write CSV, SVG and manifest files.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
        /// Worker threads; falls back to ABM_THREADS, then 1.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Write Graphviz files of a pack's statecharts.
    ExportCharts {
        #[arg(long)]
        pack: String,
        #[arg(long)]
        out: PathBuf,
    },
}

const CONFIG_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 1;

fn jobs_from_env() -> Option<usize> {
    std::env::var("ABM_THREADS").ok()?.trim().parse().ok()
}

fn load(path: &Path) -> Result<ScenarioConfig, ExitCode> {
    ScenarioConfig::load(path).map_err(|e| {
        eprintln!("error: {}: {e}", path.display());
        ExitCode::from(CONFIG_ERROR)
    })
}

fn run(
    scenario: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    realizations: Option<usize>,
    jobs: Option<usize>,
    quiet: bool,
) -> ExitCode {
    let mut cfg = match load(&scenario) {
        Ok(c) => c,
        Err(code) => return code,
    };
    if let Some(s) = seed {
        cfg.master_seed = s;
    }
    if let Some(r) = realizations {
        cfg.realizations = r;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(CONFIG_ERROR);
    }
    let jobs = jobs.or_else(jobs_from_env).unwrap_or(1);
    if jobs == 0 {
        eprintln!("error: --jobs must be at least 1");
        return ExitCode::from(CONFIG_ERROR);
    }
    if !quiet {
        eprintln!(
            "{}: {} agents, {} realizations, {} variant(s), {jobs} job(s)",
            cfg.model_pack.name(),
            cfg.population,
            cfg.realizations,
            runner::variants(&cfg).len()
        );
    }
    match runner::run_to_dir(&cfg, &out, jobs) {
        Ok(m) => {
            if !quiet {
                eprintln!("wrote {} files to {}", m.artifacts.len(), out.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ RunError::Partial { .. }) => {
            eprintln!("error: {e}; see {}", out.join("manifest.json").display());
            ExitCode::from(RUNTIME_ERROR)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}

fn export_charts(pack: &str, out: PathBuf) -> ExitCode {
    let Some(pack) = ModelPack::parse(pack) else {
        eprintln!("error: unknown pack `{pack}` (expected varicella or pertussis)");
        return ExitCode::from(CONFIG_ERROR);
    };
    let set: ChartSet = match pack {
        ModelPack::Varicella => varicella::charts::build(&Default::default()).0,
        ModelPack::Pertussis => pertussis::charts::build(&Default::default()).0,
    };
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: {}: {e}", out.display());
        return ExitCode::from(RUNTIME_ERROR);
    }
    for slot in 0..set.len() {
        let chart = set.get(slot);
        let path = out.join(format!("{}.dot", chart.name()));
        if let Err(e) = std::fs::write(&path, chart.to_dot()) {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(RUNTIME_ERROR);
        }
        println!("{}", path.display());
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            realizations,
            jobs,
            quiet,
        } => run(scenario, out, seed, realizations, jobs, quiet),
        Command::Validate { scenario } => match load(&scenario) {
            Ok(cfg) => {
                println!(
                    "{}: ok ({}, {} agents, {} realizations)",
                    scenario.display(),
                    cfg.model_pack.name(),
                    cfg.population,
                    cfg.realizations
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::ExportCharts { pack, out } => export_charts(&pack, out),
    }
}
