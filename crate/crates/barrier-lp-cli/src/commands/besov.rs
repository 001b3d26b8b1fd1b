use std::io::Write;

use barrier_lp::besov::{self, BesovParams};
use barrier_lp::dyadic::SystemKind;
use barrier_lp::functions;
use barrier_lp::transform;
use clap::Args;
use num_complex::Complex64;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct BesovArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    /// use "inf" for the sup over bands
    #[arg(long, default_value = "2")]
    pub q: String,
    #[arg(long, default_value_t = 10)]
    pub j_max: i32,
    /// homogeneous norm over bands [j_min, j_max]
    #[arg(long)]
    pub homogeneous: bool,
    #[arg(long, default_value_t = -10)]
    pub j_min: i32,
    /// number of seeded band-limited Gaussians
    #[arg(long, default_value_t = 5)]
    pub family_count: usize,
    /// compare against the FFT pipeline for the free operator
    #[arg(long)]
    pub compare_classical: bool,
    /// also compute Peetre maximal functions and comparability constants
    #[arg(long)]
    pub peetre: bool,
    /// Peetre exponent (defaults to 1/p + 1/2)
    #[arg(long)]
    pub smoothness_exponent: Option<f64>,
}

fn parse_q(q: &str) -> anyhow::Result<f64> {
    if q == "inf" {
        Ok(f64::INFINITY)
    } else {
        Ok(q.parse()?)
    }
}

pub fn run(cfg: &RunConfig, args: &BesovArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let q = parse_q(&args.q)?;
    let mut outcome = Outcome::new(
        "besov",
        json!({
            "alpha": args.alpha, "p": args.p, "q": args.q,
            "j_max": args.j_max, "homogeneous": args.homogeneous, "j_min": args.j_min,
            "family_count": args.family_count,
            "compare_classical": args.compare_classical,
            "peetre": args.peetre,
        }),
    );
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;
    let kind = if args.homogeneous {
        SystemKind::Homogeneous
    } else {
        SystemKind::Inhomogeneous
    };
    let sys = cfg.system(kind)?;
    let mut params = BesovParams::new(args.alpha, args.p, q)?.with_j_max(args.j_max);
    if args.homogeneous {
        params = params.homogeneous(args.j_min, args.j_max);
    }
    if let Some(s) = args.smoothness_exponent {
        params = params.with_smoothness(s);
    }

    let coverage = 2f64.powf(args.j_max as f64 / 2.0).max(cfg.xi_max);
    let sg = cfg.spectral_builder(&pot, &grid).covering(coverage)?;
    let window = (coverage * coverage / 4.0).min(64.0);
    let family = functions::band_limited_family(
        cfg.seed,
        args.family_count,
        window * 0.5,
        window,
        &grid,
        &sg,
        &pot,
    )?;

    let mut bands_csv = out.writer("bands.csv")?;
    writeln!(bands_csv, "function,j,band_norm,weighted_term")?;
    let mut totals = Vec::new();
    let mut classical_gaps: Vec<f64> = Vec::new();
    let mut truncation_warned = false;
    for (idx, f) in family.iter().enumerate() {
        let norms = besov::besov_norm(f, &params, &sys, &pot, &grid, &sg)?;
        for &(j, b) in &norms.bands {
            writeln!(
                bands_csv,
                "{idx},{j},{b},{}",
                2f64.powf(j as f64 * args.alpha) * b
            )?;
        }
        if let Some(head) = norms.head {
            writeln!(bands_csv, "{idx},0,{head},{head}")?;
        }
        truncation_warned |= norms.tail_fraction > 1e-6;
        if norms.truncation_warning {
            log::warn!(
                "function {idx}: top band at {:.2e} of the total",
                norms.tail_fraction
            );
        }
        totals.push(norms.total);

        if args.compare_classical {
            let ours =
                besov::besov_norm_windowed(f, &params, &sys, &pot, &grid, &sg, 4)?.total;
            let classical =
                besov::besov_norm_classical_windowed(f, &params, &sys, &grid, 4)?.total;
            classical_gaps.push((ours - classical).abs() / classical);
        }
    }

    if truncation_warned {
        // well above the re-sampling noise floor: genuine under-coverage
        outcome.diagnostic("truncation window too small for at least one input (top band above 1e-6 of the total)");
    }
    if args.compare_classical {
        let max_gap = classical_gaps.iter().cloned().fold(0.0, f64::max);
        // small eps: the norms converge; fixed eps: they stay comparable
        if cfg.epsilon.map_or(true, |eps| eps <= 0.01) {
            outcome.check("classical-limit relative gap", max_gap, 1e-4);
        } else {
            outcome.check("classical comparability max gap", max_gap, 49.0);
        }
        outcome.results = json!({
            "totals": totals,
            "classical_gaps": classical_gaps,
            "system": sys.descriptor(),
        });
    } else {
        outcome.results = json!({
            "totals": totals,
            "system": sys.descriptor(),
        });
    }

    if args.peetre {
        let f = &family[0];
        let mut peetre_csv = out.writer("peetre.csv")?;
        writeln!(peetre_csv, "j,x,band_abs,maximal")?;
        let mut constants = Vec::new();
        let hat = transform::forward(f, &grid, &sg, &pot)?;
        let js: Vec<i32> = if args.homogeneous {
            vec![args.j_min.max(-4), 0, 2, 4]
        } else {
            vec![0, 2, 4, 6]
        };
        for &j in &js {
            let star = besov::peetre_maximal(f, j, &params, &sys, &pot, &grid, &sg)?;
            let masked: Vec<Complex64> = hat
                .iter()
                .zip(sg.nodes())
                .map(|(&h, &xi)| h * sys.eval_band(j, xi * xi))
                .collect();
            let band = transform::adjoint(&masked, &sg, &grid, &pot)?;
            let mut dominated = true;
            for i in 0..grid.len() {
                dominated &= star[i] >= band[i].norm() - 1e-13;
                writeln!(
                    peetre_csv,
                    "{j},{},{},{}",
                    grid.point(i),
                    band[i].norm(),
                    star[i]
                )?;
            }
            if !dominated {
                outcome
                    .invariant_failures
                    .push(format!("Peetre domination fails at band {j}"));
            }
            let star_lp = grid.lp_norm(
                &star.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>(),
                args.p,
            );
            let band_lp = grid.lp_norm(&band, args.p);
            constants.push(json!({"j": j, "comparability": star_lp / band_lp}));
        }
        outcome.results["peetre_constants"] = json!(constants);
    }

    Ok(outcome)
}
