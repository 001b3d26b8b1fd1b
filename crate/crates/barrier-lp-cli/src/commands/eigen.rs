use std::io::Write;

use barrier_lp::eigen::{self, Branch};
use barrier_lp::transfer_matrix;
use clap::Args;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct EigenArgs {
    /// lowest tabulated frequency
    #[arg(long, default_value_t = 0.01)]
    pub xi_min: f64,
    /// highest tabulated frequency
    #[arg(long, default_value_t = 8.0)]
    pub xi_max: f64,
    /// number of log-spaced frequencies (tabulated at both signs)
    #[arg(long, default_value_t = 200)]
    pub xi_count: usize,
    /// cross-check the closed forms against the transfer-matrix solver
    #[arg(long)]
    pub check_transfer_matrix: bool,
    /// tabulate e(x, xi) for this many of the frequencies
    #[arg(long, default_value_t = 4)]
    pub table_frequencies: usize,
}

pub fn run(cfg: &RunConfig, args: &EigenArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "eigen",
        json!({
            "xi_min": args.xi_min,
            "xi_max": args.xi_max,
            "xi_count": args.xi_count,
            "check_transfer_matrix": args.check_transfer_matrix,
        }),
    );
    anyhow::ensure!(args.xi_min > 0.0 && args.xi_min < args.xi_max, "need 0 < xi-min < xi-max");
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;

    // x-samples for the symmetry residual
    let xs: Vec<f64> = (0..48).map(|i| grid.x_min() + (grid.x_max() - grid.x_min()) * i as f64 / 47.0).collect();

    let mut table = out.writer("eigen_table.csv")?;
    writeln!(
        table,
        "xi,a_re,a_im,a_prime_re,a_prime_im,b_re,b_im,b_prime_re,b_prime_im,\
         c_re,c_im,c_prime_re,c_prime_im,flux_residual,symmetry_residual,transfer_gap"
    )?;

    let mut max_flux: f64 = 0.0;
    let mut max_symmetry: f64 = 0.0;
    let mut max_transfer: f64 = 0.0;
    for i in 0..args.xi_count {
        let t = i as f64 / (args.xi_count - 1).max(1) as f64;
        let magnitude = args.xi_min * (args.xi_max / args.xi_min).powf(t);
        for xi in [magnitude, -magnitude] {
            let co = eigen::coefficients(xi, &pot)?;
            let flux = co.flux_residual();
            max_flux = max_flux.max(flux);

            let symmetry = xs
                .iter()
                .map(|&x| {
                    let lhs = eigen::eval_eigenfunction(x, -xi, &pot).unwrap();
                    let rhs = eigen::eval_eigenfunction(-x, xi, &pot).unwrap();
                    (lhs - rhs).norm()
                })
                .fold(0.0, f64::max);
            max_symmetry = max_symmetry.max(symmetry);

            let transfer_gap = if args.check_transfer_matrix {
                let tm = transfer_matrix::scattering(xi, &pot);
                let (t_ours, r_ours) = match co.sign {
                    Branch::Plus => (co.c, co.a_prime),
                    Branch::Minus => (co.a, co.c_prime),
                };
                let scale = t_ours.norm().max(r_ours.norm()).max(1e-30);
                let gap = ((t_ours - tm.transmission).norm().max((r_ours - tm.reflection).norm()))
                    / scale;
                max_transfer = max_transfer.max(gap);
                gap
            } else {
                f64::NAN
            };

            writeln!(
                table,
                "{xi},{},{},{},{},{},{},{},{},{},{},{},{},{flux},{symmetry},{transfer_gap}",
                co.a.re,
                co.a.im,
                co.a_prime.re,
                co.a_prime.im,
                co.b.re,
                co.b.im,
                co.b_prime.re,
                co.b_prime.im,
                co.c.re,
                co.c.im,
                co.c_prime.re,
                co.c_prime.im,
            )?;
        }
    }

    // sampled eigenfunctions for a few frequencies
    let mut func = out.writer("eigenfunctions.csv")?;
    writeln!(func, "xi,x,re,im")?;
    for i in 0..args.table_frequencies {
        let t = (i as f64 + 0.5) / args.table_frequencies as f64;
        let xi = args.xi_min * (args.xi_max / args.xi_min).powf(t);
        let ef = eigen::Eigenfunction::new(&pot, xi)?;
        for k in 0..grid.len() {
            let x = grid.point(k);
            let v = ef.eval(x);
            writeln!(func, "{xi},{x},{},{}", v.re, v.im)?;
        }
    }

    outcome.check("flux identity", max_flux, 1e-12);
    outcome.check("symmetry identity", max_symmetry, 1e-12);
    if args.check_transfer_matrix {
        outcome.check("transfer-matrix agreement", max_transfer, 1e-10);
    }
    outcome.results = json!({
        "max_flux_residual": max_flux,
        "max_symmetry_residual": max_symmetry,
        "max_transfer_gap": if args.check_transfer_matrix { Some(max_transfer) } else { None },
        "rows": 2 * args.xi_count,
    });
    Ok(outcome)
}
