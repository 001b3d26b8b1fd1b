use std::io::Write;

use barrier_lp::dyadic::SystemKind;
use barrier_lp::verify;
use clap::Args;
use serde_json::json;

use crate::commands::parse_symbol;
use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct HormanderArgs {
    /// first kernel column
    #[arg(long, default_value_t = 3.0)]
    pub y: f64,
    /// second kernel column
    #[arg(long, default_value_t = 3.1)]
    pub y_bar: f64,
    /// symbol: identity | rational | imag:<tau>
    #[arg(long, default_value = "rational")]
    pub symbol: String,
    /// override the adaptive band window: lower band index
    #[arg(long)]
    pub j_lo: Option<i32>,
    /// override the adaptive band window: upper band index
    #[arg(long)]
    pub j_hi: Option<i32>,
    /// also run with the window extended (8 bands lower, 2 higher) and
    /// report the delta
    #[arg(long)]
    pub check_window: bool,
}

pub fn run(cfg: &RunConfig, args: &HormanderArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "hormander",
        json!({
            "y": args.y, "y_bar": args.y_bar, "symbol": args.symbol,
            "j_lo": args.j_lo, "j_hi": args.j_hi,
            "check_window": args.check_window,
        }),
    );
    let pot = cfg.potential()?;
    anyhow::ensure!(!pot.is_free(), "the cancellation experiment needs a barrier (threshold index J)");
    let grid = cfg.grid()?;
    let sys = cfg.system(SystemKind::Homogeneous)?;
    let m = parse_symbol(&args.symbol)?;
    let (auto_lo, auto_hi) = verify::hormander_window(&pot, (args.y - args.y_bar).abs());
    let (lo, hi) = (args.j_lo.unwrap_or(auto_lo), args.j_hi.unwrap_or(auto_hi));
    anyhow::ensure!(lo < hi, "empty band window [{lo}, {hi}]");

    let report = verify::hormander_integral(&m, args.y, args.y_bar, &pot, &sys, &grid, lo..=hi)?;

    let mut per_j = out.writer("per_band.csv")?;
    writeln!(per_j, "j,term,dichotomy_bound,ratio")?;
    for &(j, term, bound) in &report.per_j {
        writeln!(per_j, "{j},{term},{bound},{}", term / bound)?;
    }

    if !report.truncation_ok {
        outcome.diagnostic("extreme-band terms exceed 1% of the Hörmander total");
    }

    if args.check_window {
        let wide =
            verify::hormander_integral(&m, args.y, args.y_bar, &pot, &sys, &grid, lo - 8..=hi + 2)?;
        let delta = (wide.total - report.total).abs() / report.total;
        outcome.refinement_delta = Some(json!({"window_doubling_relative_delta": delta}));
        outcome.check("window-doubling stability", delta, 0.01);
    }

    outcome.results = serde_json::to_value(&report)?;
    Ok(outcome)
}
