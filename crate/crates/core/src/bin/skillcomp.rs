use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use skillcomp::experiment::{run_experiment, ExperimentConfig, ExperimentKind, RunOverrides};

#[derive(Parser)]
#[command(name = "skillcomp", version, about = "Skill-composition simulators, probes and dataset generators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minibatch SGD on one trial.
    MinimalRun(RunArgs),
    /// Population gradient descent on one trial, with PL and stage reports.
    PopulationRun(RunArgs),
    /// Grid over power-law exponents and seeds, with a summary table.
    SweepAlpha(RunArgs),
    /// Matched power-law vs uniform SGD at the power-law success budget.
    Separation(RunArgs),
    /// PCA loss-landscape slices for the uniform and power-law arms.
    Landscape(RunArgs),
    /// Stationary-point, initialization, PL, noise and packing probes.
    Probes(RunArgs),
    /// Synthetic dataset generation.
    GenData(RunArgs),
    /// Parse and validate a config without running it.
    Validate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Output root (overrides the config and the environment).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Maximum number of trials run at once.
    #[arg(long)]
    parallelism: Option<usize>,
    /// Root seed (overrides `seeds.root`).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(kind: Option<ExperimentKind>, args: RunArgs) -> skillcomp::Result<i32> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(kind) = kind {
        if cfg.kind != kind {
            return Err(skillcomp::Error::Config(vec![format!(
                "config kind is {} but the {} subcommand was used",
                cfg.kind.name(),
                kind.name()
            )]));
        }
    }
    if let Some(seed) = args.seed {
        cfg.seeds.root = Some(seed);
    }
    if kind.is_none() {
        cfg.validate()?;
        println!("{} config is valid (hash {})", cfg.kind.name(), cfg.hash());
        return Ok(0);
    }
    let overrides = RunOverrides { output_root: args.out, parallelism: args.parallelism, seed: args.seed };
    let report = run_experiment(&cfg, &overrides)?;
    let m = &report.manifest;
    println!("{}", report.dir.display());
    for a in &m.artifacts {
        println!("  {}", a.path);
    }
    println!("  manifest.json");
    if report.diverged() {
        eprintln!("{} of {} trials diverged", m.diverged, m.trials.len());
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::MinimalRun(a) => (Some(ExperimentKind::MinimalRun), a),
        Command::PopulationRun(a) => (Some(ExperimentKind::PopulationRun), a),
        Command::SweepAlpha(a) => (Some(ExperimentKind::SweepAlpha), a),
        Command::Separation(a) => (Some(ExperimentKind::Separation), a),
        Command::Landscape(a) => (Some(ExperimentKind::Landscape), a),
        Command::Probes(a) => (Some(ExperimentKind::Probes), a),
        Command::GenData(a) => (Some(ExperimentKind::GenData), a),
        Command::Validate(a) => (None, a),
    };
    match run(kind, args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
