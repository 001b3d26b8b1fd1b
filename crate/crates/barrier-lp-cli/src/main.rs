//! `barrier-lp`: batch front door for the verification lab.
//!
//! Each subcommand maps to one experiment family; runs are reproducible
//! (seeded, hashed configuration, fixed summation order at any thread
//! count) and write machine-readable reports.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Family, RunConfig};
use output::OutputDir;

#[derive(Parser)]
#[command(name = "barrier-lp", version, about, allow_negative_numbers = true)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON file with base configuration (flags override it)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// worker threads (default: all cores); results are identical at any
    /// thread count
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// quadrature/grid density doublings; reports include the delta
    /// against one level coarser
    #[arg(long, global = true)]
    refine: Option<u32>,
    /// barrier parameter (height = epsilon²)
    #[arg(long, global = true, conflicts_with = "free")]
    epsilon: Option<f64>,
    /// free particle (V = 0)
    #[arg(long, global = true)]
    free: bool,
    /// half-width of the spatial grid
    #[arg(long, global = true)]
    extent: Option<f64>,
    /// number of spatial samples
    #[arg(long, global = true)]
    points: Option<usize>,
    /// spectral coverage |xi| <= xi_max
    #[arg(long, global = true)]
    xi_max: Option<f64>,
    /// dyadic construction family
    #[arg(long, global = true, value_enum)]
    family: Option<Family>,
    /// bump steepness of the dyadic construction (>= 2)
    #[arg(long, global = true)]
    smoothness: Option<u32>,
    /// seed for the pseudo-random test families
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate eigenfunctions, scattering coefficients, and their
    /// residuals
    Eigen(commands::eigen::EigenArgs),
    /// Assemble a band kernel and check its symmetries
    Kernel(commands::kernel::KernelArgs),
    /// Besov norms of a seeded family, with optional classical comparison
    /// and Peetre maximal functions
    Besov(commands::besov::BesovArgs),
    /// Fit a band kernel against its decay envelope
    Decay(commands::decay::DecayArgs),
    /// Hörmander cancellation integral over a band window
    Hormander(commands::hormander::HormanderArgs),
    /// Operator norms of a spectral multiplier over a test family
    Multiplier(commands::multiplier::MultiplierArgs),
    /// Propagate an initial packet spectrally and/or by Crank-Nicolson
    Evolve(commands::evolve::EvolveArgs),
}

fn merge_config(global: &GlobalArgs) -> anyhow::Result<RunConfig> {
    let mut cfg = match &global.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if global.free {
        cfg.epsilon = None;
    } else if let Some(eps) = global.epsilon {
        cfg.epsilon = Some(eps);
    }
    if let Some(v) = global.extent {
        cfg.grid_extent = v;
    }
    if let Some(v) = global.points {
        cfg.grid_points = v;
    }
    if let Some(v) = global.xi_max {
        cfg.xi_max = v;
    }
    if let Some(v) = global.family {
        cfg.family = v;
    }
    if let Some(v) = global.smoothness {
        cfg.smoothness_order = v;
    }
    if let Some(v) = global.seed {
        cfg.seed = v;
    }
    if let Some(v) = global.refine {
        cfg.refine = v;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> anyhow::Result<i32> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let cfg = merge_config(&cli.global)?;
    let out = OutputDir::create(&cli.global.out)?;
    let outcome = match &cli.command {
        Command::Eigen(args) => commands::eigen::run(&cfg, args, &out)?,
        Command::Kernel(args) => commands::kernel::run(&cfg, args, &out)?,
        Command::Besov(args) => commands::besov::run(&cfg, args, &out)?,
        Command::Decay(args) => commands::decay::run(&cfg, args, &out)?,
        Command::Hormander(args) => commands::hormander::run(&cfg, args, &out)?,
        Command::Multiplier(args) => commands::multiplier::run(&cfg, args, &out)?,
        Command::Evolve(args) => commands::evolve::run(&cfg, args, &out)?,
    };
    out.finish(&cfg, &outcome)
}
