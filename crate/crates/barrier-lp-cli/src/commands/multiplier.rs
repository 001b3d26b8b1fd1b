use std::io::Write;

use barrier_lp::besov::BesovParams;
use barrier_lp::dyadic::SystemKind;
use barrier_lp::functions;
use barrier_lp::verify;
use clap::Args;
use serde_json::json;

use crate::commands::parse_symbol;
use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct MultiplierArgs {
    /// symbol: identity | rational | imag:<tau>
    #[arg(long, default_value = "rational")]
    pub symbol: String,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// family size (>= 20 spans scales, shifts, and modulations)
    #[arg(long, default_value_t = 24)]
    pub family_count: usize,
    /// also measure the Besov-norm ratio at these parameters
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
}

pub fn run(cfg: &RunConfig, args: &MultiplierArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "multiplier",
        json!({
            "symbol": args.symbol, "p": args.p,
            "family_count": args.family_count, "alpha": args.alpha, "q": args.q,
        }),
    );
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;
    let m = parse_symbol(&args.symbol)?;
    let sg = cfg.spectral_builder(&pot, &grid).covering(cfg.xi_max)?;
    let window = (cfg.xi_max * cfg.xi_max / 4.0).min(64.0);
    let family = functions::band_limited_family(
        cfg.seed,
        args.family_count,
        window * 0.5,
        window,
        &grid,
        &sg,
        &pot,
    )?;

    let report = verify::multiplier_operator_norm(&m, args.p, &family, &pot, &grid, &sg)?;

    let mut csv = out.writer("ratios.csv")?;
    writeln!(csv, "function,lp_ratio")?;
    for (i, r) in report.ratios.iter().enumerate() {
        writeln!(csv, "{i},{r}")?;
    }

    // the spectral theorem is exact at p = 2
    if args.p == 2.0 {
        outcome.check(
            "p=2 norm against sup |m|",
            report.max_ratio,
            report.sup_symbol + 1e-6,
        );
    } else {
        outcome.check("Lp family ratio bounded", report.max_ratio, 10.0);
    }

    let besov_ratio = if let Some(alpha) = args.alpha {
        let params = BesovParams::new(alpha, args.p, args.q)?;
        let sys = cfg.system(SystemKind::Inhomogeneous)?;
        let ratio =
            verify::multiplier_besov_ratio(&m, &params, &sys, &family, &pot, &grid, &sg)?;
        outcome.check("Besov family ratio bounded", ratio, 10.0);
        Some(ratio)
    } else {
        None
    };

    outcome.results = json!({
        "label": report.label,
        "p": report.p,
        "mikhlin_constant": report.mikhlin_constant,
        "sup_symbol": report.sup_symbol,
        "max_lp_ratio": report.max_ratio,
        "besov_ratio": besov_ratio,
    });
    Ok(outcome)
}
