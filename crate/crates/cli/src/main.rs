mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use run::{Context, Failure, Outcome, Overrides};

#[derive(Parser, Debug)]
#[command(name = "odenet", version, about = "Neural ODE training, turnpike and controllability experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides both the data seed and the initialization seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Scheme for the written trajectory; training always uses forward Euler.
    #[arg(long, value_parser = ["euler", "rk4"])]
    scheme: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train one network and write its trajectory and metrics.
    Train(Common),
    /// Train at every horizon of `[sweep]` and report rescaled control norms.
    SweepHorizon(Common),
    /// Train a tracking (or L1) problem and fit the turnpike profile.
    Turnpike {
        #[command(flatten)]
        common: Common,
        /// Drop the final training error from the cost.
        #[arg(long)]
        no_final_cost: bool,
        /// Switch to the L1-regularized problem with node bound M.
        #[arg(long, value_name = "M")]
        l1: Option<f64>,
    },
    /// Depth-growing pre-training or windowed training from `[greedy]`.
    Greedy(Common),
    /// Steer points along straight arcs with least-norm weights.
    Steer(Common),
    /// Lower bounds on the weights needed to interpolate.
    Bounds(Common),
    /// Variable-width nonlocal network on (0, 1).
    NonlocalDemo(Common),
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("NODE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Config(format!("NODE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Outcome<()> {
    configure_threads()?;
    let (common, ov, f): (Common, Overrides, fn(&Context) -> Outcome<()>) = match cli.command {
        Command::Train(c) => (c, Overrides::default(), run::train),
        Command::SweepHorizon(c) => (c, Overrides::default(), run::sweep_horizon),
        Command::Turnpike { common, no_final_cost, l1 } => {
            (common, Overrides { no_final_cost, l1, ..Default::default() }, run::turnpike)
        }
        Command::Greedy(c) => (c, Overrides::default(), run::greedy),
        Command::Steer(c) => (c, Overrides::default(), run::steer),
        Command::Bounds(c) => (c, Overrides::default(), run::bounds),
        Command::NonlocalDemo(c) => (c, Overrides::default(), run::nonlocal_demo),
    };
    let ov = Overrides { seed: common.seed, scheme: common.scheme.clone(), ..ov };
    let config = run::read_config(&common.config)?;
    let ctx = Context::new(config, common.out, &ov)?;
    f(&ctx)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("odenet: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
