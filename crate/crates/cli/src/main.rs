//! `quad`: config-driven experiment runner.
//!
//! Exit status 0 on success, 2 when the config fails validation, 1 when the
//! library reports an error. `QUAD_THREADS` sets the worker count.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{validate, ExperimentConfig, Task};

#[derive(Parser)]
#[command(name = "quad", version, about = "Quadrature and worst-case error experiments on tori and the sphere")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point set.
    Gen(TaskArgs),
    /// Worst-case error of a point set.
    Wce(TaskArgs),
    /// Cap or kernel level-set discrepancy.
    Disc(TaskArgs),
    /// Positive exact rule for a spectral band.
    Rule(TaskArgs),
    /// L^q norm of the error kernel on a grid.
    Qnorm(TaskArgs),
    /// Adversarial lower bound (torus).
    Bound(TaskArgs),
    /// Error at a smaller smoothness.
    Transfer(TaskArgs),
    /// One-node perturbation of an exact rule.
    Perturb(TaskArgs),
    /// Slope of the worst-case error over N or r.
    Scale(TaskArgs),
}

#[derive(Args)]
struct TaskArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Validate only.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    flags: ExperimentConfig,
}

impl Command {
    fn split(self) -> (Task, TaskArgs) {
        match self {
            Command::Gen(a) => (Task::Gen, a),
            Command::Wce(a) => (Task::Wce, a),
            Command::Disc(a) => (Task::Disc, a),
            Command::Rule(a) => (Task::Rule, a),
            Command::Qnorm(a) => (Task::Qnorm, a),
            Command::Bound(a) => (Task::Bound, a),
            Command::Transfer(a) => (Task::Transfer, a),
            Command::Perturb(a) => (Task::Perturb, a),
            Command::Scale(a) => (Task::Scale, a),
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("QUAD_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("QUAD_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("QUAD_THREADS must be a positive integer, got 0".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let (task, args) = Cli::parse().command.split();
    if let Err(e) = init_threads() {
        eprintln!("quad: {e}");
        return ExitCode::from(2);
    }
    let mut cfg = match &args.config {
        Some(p) => match ExperimentConfig::from_file(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("quad: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(t) = cfg.task {
        if t != task {
            eprintln!("quad: task: config file is for {}, not {}", t.name(), task.name());
            return ExitCode::from(2);
        }
    }
    cfg.task = Some(task);
    let cfg = cfg.overridden_by(&args.flags);
    let plan = match validate(&cfg) {
        Ok(p) => p,
        Err(violations) => {
            for v in violations {
                eprintln!("quad: {v}");
            }
            return ExitCode::from(2);
        }
    };
    if args.check {
        println!("task={} valid config_hash={}", task.name(), plan.config_hash);
        return ExitCode::SUCCESS;
    }
    match run::run(&plan) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("quad: {e}");
            ExitCode::from(1)
        }
    }
}
