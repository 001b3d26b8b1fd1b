
use barrier_lp::evolve;
use barrier_lp::functions::{band_limit, GaussianSpec};
use clap::Args;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum EvolveMethod {
    Spectral,
    CrankNicolson,
    Both,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct EvolveArgs {
    /// evolution time
    #[arg(long, default_value_t = 0.5)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = EvolveMethod::Spectral)]
    pub method: EvolveMethod,
    /// Crank-Nicolson step
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// initial packet center
    #[arg(long, default_value_t = -3.0)]
    pub center: f64,
    /// initial packet width
    #[arg(long, default_value_t = 1.0)]
    pub width: f64,
    /// initial packet modulation (carrier frequency)
    #[arg(long, default_value_t = 1.5)]
    pub modulation: f64,
    /// skip the spectral band-limiting of the packet
    #[arg(long)]
    pub raw_packet: bool,
}

pub fn run(cfg: &RunConfig, args: &EvolveArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "evolve",
        json!({
            "t": args.t, "method": format!("{:?}", args.method), "dt": args.dt,
            "center": args.center, "width": args.width, "modulation": args.modulation,
            "raw_packet": args.raw_packet,
        }),
    );
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;
    let spec = GaussianSpec {
        center: args.center,
        width: args.width,
        modulation: args.modulation,
        amplitude: 1.0,
    };
    let sg = cfg
        .spectral_builder(&pot, &grid)
        .phase_time(args.t)
        .covering(cfg.xi_max)?;
    let window = (cfg.xi_max * cfg.xi_max / 4.0).min(64.0);
    let f = if args.raw_packet {
        spec.sample(&grid)
    } else {
        band_limit(&spec.sample(&grid), window * 0.5, window, &grid, &sg, &pot)?
    };
    crate::commands::write_samples_csv(out.writer("initial.csv")?, &grid, &f)?;

    let spectral = if args.method != EvolveMethod::CrankNicolson {
        let run = evolve::propagate_spectral(&f, args.t, &pot, &grid, &sg)?;
        crate::commands::write_samples_csv(out.writer("spectral.csv")?, &grid, &run.samples)?;
        outcome.check("spectral L2 drift", run.l2_drift, 1e-6);
        Some(run)
    } else {
        None
    };

    let fd = if args.method != EvolveMethod::Spectral {
        let run = evolve::propagate_fd_refined(&f, args.t, args.dt, &pot, &grid, 4)?;
        crate::commands::write_samples_csv(
            out.writer("crank_nicolson.csv")?,
            &grid,
            &run.samples,
        )?;
        outcome.check("Crank-Nicolson L2 drift", run.l2_drift, 1e-4);
        Some(run)
    } else {
        None
    };

    let cross_gap = match (&spectral, &fd) {
        (Some(a), Some(b)) => {
            let diff: Vec<_> = a
                .samples
                .iter()
                .zip(&b.samples)
                .map(|(&u, &v)| u - v)
                .collect();
            let gap = grid.lp_norm(&diff, 2.0) / grid.lp_norm(&f, 2.0);
            outcome.check("spectral vs Crank-Nicolson", gap, 1e-3);
            Some(gap)
        }
        _ => None,
    };

    outcome.results = json!({
        "t": args.t,
        "spectral_drift": spectral.as_ref().map(|r| r.l2_drift),
        "crank_nicolson_drift": fd.as_ref().map(|r| r.l2_drift),
        "effective_dt": fd.as_ref().and_then(|r| r.dt),
        "cross_method_gap": cross_gap,
    });
    Ok(outcome)
}
