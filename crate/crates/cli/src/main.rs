//! `fdec` command-line front end.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a run completes but
//! one of its checks fails.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fdec::harness::config::load_config_file;
use fdec::harness::{execute, Experiment, ExperimentConfig};
use fdec::FdecError;

#[derive(Parser, Debug)]
#[command(name = "fdec", version, about = "Fractional discrete exterior calculus experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Error of the discrete operator against the continuous one over n.
    Convergence(Opts),
    /// Error over a grid of α at a fixed n.
    AlphaSweep(Opts),
    /// Residual of two consecutive fractional derivatives.
    Exactness(Opts),
    /// Nonzero counts of the assembled operators against closed forms.
    Sparsity(Opts),
    /// Exactness residuals for every operator variant.
    Variants(Opts),
    /// Writes the assembled matrices as triplet CSV.
    DumpOperators(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Registered test field (paper-f, paper-F, smooth).
    #[arg(long)]
    field: Option<String>,
    /// Comma-separated form degrees.
    #[arg(long)]
    p: Option<String>,
    /// Comma-separated derivative orders in (0, 1).
    #[arg(long)]
    alpha: Option<String>,
    /// Comma-separated integral orders (sparsity audit).
    #[arg(long)]
    beta: Option<String>,
    /// Comma-separated subdivision counts.
    #[arg(long)]
    n: Option<String>,
    /// paper, drlD-right or drlD-both.
    #[arg(long)]
    variant: Option<String>,
    #[arg(long)]
    quad_points: Option<String>,
    #[arg(long)]
    quad_panels: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Config file or a previous run's manifest.jsonl.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record wall-clock times in the result CSV.
    #[arg(long)]
    timings: bool,
}

impl Command {
    fn split(self) -> (Experiment, Opts) {
        match self {
            Command::Convergence(o) => (Experiment::Convergence, o),
            Command::AlphaSweep(o) => (Experiment::AlphaSweep, o),
            Command::Exactness(o) => (Experiment::Exactness, o),
            Command::Sparsity(o) => (Experiment::Sparsity, o),
            Command::Variants(o) => (Experiment::Variants, o),
            Command::DumpOperators(o) => (Experiment::DumpOperators, o),
        }
    }
}

fn build_config(opts: &Opts) -> fdec::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    if let Some(path) = &opts.config {
        cfg.apply(&load_config_file(path)?)?;
    }
    let flags = [
        ("field", opts.field.clone()),
        ("p", opts.p.clone()),
        ("alpha", opts.alpha.clone()),
        ("beta", opts.beta.clone()),
        ("n", opts.n.clone()),
        ("variant", opts.variant.clone()),
        ("quad-points", opts.quad_points.clone()),
        ("quad-panels", opts.quad_panels.clone()),
        ("out", opts.out.as_ref().map(|p| p.display().to_string())),
        ("jobs", opts.jobs.clone()),
        ("seed", opts.seed.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    if opts.timings {
        cfg.timings = true;
    }
    Ok(cfg)
}

fn run(exp: Experiment, opts: &Opts) -> fdec::Result<()> {
    let cfg = build_config(opts)?;
    let report = execute(exp, &cfg)?;
    for path in &report.artifacts {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", report.manifest.display());
    if report.failures.is_empty() {
        Ok(())
    } else {
        Err(FdecError::CheckFailed(report.failures.join("\n")))
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
    let (exp, opts) = cli.command.split();
    match run(exp, &opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(FdecError::CheckFailed(msg)) => {
            eprintln!("check failed:\n{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
