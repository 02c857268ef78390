use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dess_cli::{cmd_bench, cmd_navigate, cmd_render, BudgetMode, CliError, Config};

#[derive(Parser)]
#[command(name = "dess", version, about = "Depth-based sampling and steering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-frame planner sweep over compute budgets and samplers.
    Bench {
        /// JSON config; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        budget_mode: Option<BudgetMode>,
    },
    /// Closed-loop navigation trials per scene and policy.
    Navigate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Depth view of a scene as a 16-bit PGM (millimeters, 0 = no return).
    Render {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &Option<PathBuf>) -> Result<Config, CliError> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Bench { config, out, seed, budget_mode } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.bench.seed = s;
            }
            if let Some(m) = budget_mode {
                cfg.bench.budget_mode = m;
            }
            let rows = cmd_bench(&cfg, &out)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
        }
        Command::Navigate { config, out } => {
            let cfg = load(&config)?;
            let (_, summaries) = cmd_navigate(&cfg, &out)?;
            for s in summaries {
                eprintln!(
                    "{:<9} {:<13} success {}/{} ({:.3})  time {:.1} ± {:.1} s  steer {:.2}",
                    s.level, s.policy, s.successes, s.trials, s.success_rate, s.mean_time, s.std_time, s.mean_steer_episodes
                );
            }
        }
        Command::Render { config, out } => {
            let cfg = load(&config)?;
            let img = cmd_render(&cfg, &out)?;
            eprintln!("{}×{} view, {} returns, wrote {}", img.width(), img.height(), img.valid_count(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dess: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
