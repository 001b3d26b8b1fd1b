use barrier_lp::dyadic::SystemKind;
use barrier_lp::transform::{kernel_matrix, KernelSides};
use clap::Args;
use num_complex::Complex64;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::{Outcome, OutputDir};

#[derive(Args)]
#[command(allow_negative_numbers = true)]
pub struct KernelArgs {
    /// band index; 0 selects the head kernel
    #[arg(long)]
    pub j: i32,
    /// also dump the matrix as row-major complex64 with a JSON sidecar
    #[arg(long)]
    pub export_bin: bool,
}

pub fn run(cfg: &RunConfig, args: &KernelArgs, out: &OutputDir) -> anyhow::Result<Outcome> {
    let mut outcome = Outcome::new(
        "kernel",
        json!({"j": args.j, "export_bin": args.export_bin}),
    );
    let pot = cfg.potential()?;
    let grid = cfg.grid()?;
    let sys = cfg.system(SystemKind::Inhomogeneous)?;
    let j = args.j;

    let assemble = |refine: u32| -> anyhow::Result<_> {
        let builder = cfg
            .spectral_builder(&pot, &grid)
            .refine(refine)
            .extra_extent(grid.oscillation_extent());
        let sg = if j == 0 {
            builder.covering(1.0)?
        } else {
            let lo = 2f64.powf((j as f64 - 2.0) / 2.0);
            let hi = 2f64.powf(j as f64 / 2.0);
            if lo <= pot.epsilon() {
                builder.covering(hi)?
            } else {
                builder.for_support(lo, hi)?
            }
        };
        Ok(kernel_matrix(
            |l| Complex64::new(sys.eval_band(j, l), 0.0),
            &format!("band_{j}"),
            &grid,
            &grid,
            &sg,
            &pot,
            KernelSides::default(),
        )?)
    };

    let kernel = assemble(cfg.refine)?;
    let sup = kernel.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let hermitian = kernel.hermitian_residual();
    let reflection = kernel.reflection_residual();
    let translation = if pot.is_free() {
        Some(kernel.translation_residual())
    } else {
        None
    };

    kernel.write_csv(out.writer("kernel.csv")?)?;
    if args.export_bin {
        kernel.write_binary(out.writer("kernel.bin")?)?;
        serde_json::to_writer_pretty(out.writer("kernel_meta.json")?, &kernel.sidecar())?;
    }

    // self-convergence: one refinement step on top of the configured level
    let refined = assemble(cfg.refine + 1)?;
    let delta = kernel
        .values
        .iter()
        .zip(&refined.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    outcome.refinement_delta = Some(json!({ "kernel_value_max_delta": delta }));
    if delta > 1e-8 {
        outcome.diagnostic(format!(
            "node doubling moved kernel values by {delta:.3e} (> 1e-8)"
        ));
    }

    outcome.check("hermitian symmetry", hermitian, 1e-10);
    outcome.check("reflection identity", reflection, 1e-10);
    if let Some(t) = translation {
        outcome.check("translation invariance (free)", t, 1e-8 * sup);
    }
    outcome.results = json!({
        "j": j,
        "sup_kernel": sup,
        "hermitian_residual": hermitian,
        "reflection_residual": reflection,
        "translation_residual": translation,
        "quadrature_hash": kernel.quadrature_hash,
    });
    Ok(outcome)
}
