pub mod besov;
pub mod decay;
pub mod eigen;
pub mod evolve;
pub mod hormander;
pub mod kernel;
pub mod multiplier;

use barrier_lp::grid::SpatialGrid;
use barrier_lp::verify::MultiplierSpec;
use num_complex::Complex64;

/// Symbol selector shared by the hormander and multiplier commands:
/// `identity`, `rational` (λ/(1+λ)), or `imag:<tau>` (λ^{iτ}).
pub fn parse_symbol(spec: &str) -> anyhow::Result<MultiplierSpec> {
    if spec == "identity" {
        Ok(MultiplierSpec::identity())
    } else if spec == "rational" {
        Ok(MultiplierSpec::rational())
    } else if let Some(tau) = spec.strip_prefix("imag:") {
        Ok(MultiplierSpec::imaginary_power(tau.parse()?))
    } else {
        anyhow::bail!("unknown symbol {spec:?}; use identity, rational, or imag:<tau>")
    }
}

/// `x, re, im, abs` rows for a sampled function.
pub fn write_samples_csv<W: std::io::Write>(
    mut w: W,
    grid: &SpatialGrid,
    samples: &[Complex64],
) -> std::io::Result<()> {
    writeln!(w, "x,re,im,abs")?;
    for (i, &v) in samples.iter().enumerate() {
        writeln!(w, "{},{},{},{}", grid.point(i), v.re, v.im, v.norm())?;
    }
    Ok(())
}
