use std::io::Write;

use barrier_lp::dyadic::SystemKind;
use barrier_lp::verify::{self, DecayFitOptions, DecayRegime};
use clap::Args;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct DecayArgs {
    /// band index; 0 fits the head kernel
    #[arg(long)]
    pub j: i32,
    /// envelope exponent (2, 4, or 6)
    #[arg(long, default_value_t = 4)]
    pub n: u32,
    /// fit the x-derivative kernel against the 2^j envelope
    #[arg(long)]
    pub derivative: bool,
    /// skip the full (x, y, |K|, envelope, ratio) table
    #[arg(long)]
    pub no_envelope_table: bool,
}

pub fn run(cfg: &RunConfig, args: &DecayArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "decay",
        json!({"j": args.j, "n": args.n, "derivative": args.derivative}),
    );
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;
    let sys = cfg.system(SystemKind::Inhomogeneous)?;
    let regime = DecayRegime::classify(&pot, args.j);
    let opts = DecayFitOptions::default();

    let kernel = verify::band_kernel(args.j, &pot, &sys, &grid, cfg.refine, args.derivative)?;
    let report = verify::fit_envelope(&kernel, args.j, args.n, regime, args.derivative, &opts);

    // one refinement step past the configured level for the stability delta
    let refined_kernel =
        verify::band_kernel(args.j, &pot, &sys, &grid, cfg.refine + 1, args.derivative)?;
    let refined =
        verify::fit_envelope(&refined_kernel, args.j, args.n, regime, args.derivative, &opts);
    let delta =
        (refined.fitted_constant - report.fitted_constant).abs() / report.fitted_constant;
    outcome.refinement_delta = Some(json!({"fitted_constant_relative_delta": delta}));

    if !report.fitted_constant.is_finite() {
        outcome
            .invariant_failures
            .push("fitted constant is not finite".into());
    }
    outcome.check("fitted-constant stability under refinement", delta, 0.10);

    if !args.no_envelope_table {
        let mut table = out.writer("envelope.csv")?;
        writeln!(table, "x,y,abs_kernel,envelope,ratio")?;
        for (ix, &x) in grid.points().iter().enumerate() {
            for (iy, &y) in grid.points().iter().enumerate() {
                let k = kernel.value(ix, iy).norm();
                let env = verify::envelope(regime, args.j, args.n, args.derivative, x, y);
                writeln!(table, "{x},{y},{k},{env},{}", k / env)?;
            }
        }
    }

    outcome.results = serde_json::to_value(&report)?;
    Ok(outcome)
}
