use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use twostep_harness::{commands, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "twostep", version, about = "Two-step model-free controller design experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; built-in defaults when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// overrides the number of training episodes
    #[arg(long, global = true)]
    episodes: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Learn the linear gain from excited trajectory data
    Step1 {
        #[command(flatten)]
        common: Common,
    },
    /// Train the residual actor-critic policy
    Step2 {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "k+rl")]
        mode: Mode,
    },
    /// Deterministic evaluation of one controller
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "k+rl")]
        mode: Mode,
        /// weights.json from a previous step2; trains when omitted
        #[arg(long)]
        weights: Option<PathBuf>,
    },
    /// Cost table of K0, K, K* and K+RL
    Compare {
        #[command(flatten)]
        common: Common,
    },
    /// Success/improvement rates over a beta × sigma² grid
    Sweep {
        #[command(flatten)]
        common: Common,
        /// runs per cell
        #[arg(long)]
        n_sim: Option<usize>,
        /// restricts the sweep to one mode
        #[arg(long)]
        mode: Option<Mode>,
    },
}

fn resolve(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(episodes) = common.episodes {
        cfg.step2.episodes = episodes;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Step1 { common } => {
            let cfg = resolve(&common)?;
            let s = commands::step1(&cfg, &common.out)?;
            println!(
                "K = {:?} after {} iterations (K* = {:?})",
                s.k().matrix().row(0),
                s.report.iterations,
                s.k_star.matrix().row(0)
            );
        }
        Command::Step2 { common, mode } => {
            let cfg = resolve(&common)?;
            let art = commands::step2(&cfg, mode, &common.out)?;
            let penalized = art.outcome.curve.iter().filter(|e| e.terminated_by_penalty).count();
            println!(
                "{mode}: {} episodes, {penalized} penalized, deterministic cost {:.4}",
                art.outcome.curve.len(),
                art.evaluation_cost
            );
        }
        Command::Eval { common, mode, weights } => {
            let cfg = resolve(&common)?;
            let e = commands::eval(&cfg, mode, weights.as_ref(), &common.out)?;
            println!("{mode}: cost {:.4}, success {}", e.cost(), e.success);
        }
        Command::Compare { common } => {
            let cfg = resolve(&common)?;
            for (mode, cost) in commands::compare(&cfg, &common.out)? {
                println!("{mode:>8}  {cost:.4}");
            }
        }
        Command::Sweep { common, n_sim, mode } => {
            let mut cfg = resolve(&common)?;
            if let Some(n) = n_sim {
                cfg.sweep.n_sim = n;
            }
            if let Some(m) = mode {
                cfg.sweep.modes = vec![m];
            }
            cfg.validate()?;
            for c in commands::sweep(&cfg, &common.out)? {
                println!(
                    "{:>6} beta={:<8} sigma2={:<8} success={:>5.1}% improvement={:>5.1}%",
                    c.mode.name(),
                    c.beta,
                    c.sigma2,
                    c.success_pct(),
                    c.improvement_pct()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
