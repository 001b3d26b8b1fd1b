//! Fourier-side pipeline for the free operator `H₀ = -d²/dx²`.
//!
//! Everything here goes through the FFT instead of eigenfunction
//! quadrature, so it shares no numerical machinery with the barrier
//! pipeline and serves as its comparison point: as `eps -> 0` the two
//! compute the same quantities, and at fixed `eps` the norms stay
//! comparable with constants.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;

const FOURIER_NORM: f64 = 0.3989422804014327; // (2π)^{-1/2}

/// DFT frequencies `2π k /(n h)`, `k in [-n/2, n/2)`, in FFT bin order.
pub fn frequencies(grid: &SpatialGrid) -> Vec<f64> {
    let n = grid.len() as i64;
    let step = 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing());
    (0..n)
        .map(|k| {
            let signed = if 2 * k >= n { k - n } else { k };
            signed as f64 * step
        })
        .collect()
}

/// Continuous Fourier transform `(2π)^{-1/2} ∫ f e^{-i xi x} dx`
/// approximated on the grid, returned in the bin order of [`frequencies`].
pub fn fourier_transform(f: &[Complex64], grid: &SpatialGrid) -> Result<Vec<Complex64>> {
    if f.len() != grid.len() {
        return Err(Error::GridDomain(format!(
            "sample count {} does not match grid size {}",
            f.len(),
            grid.len()
        )));
    }
    let n = grid.len();
    let mut buf = f.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = FOURIER_NORM * grid.spacing();
    for (v, &xi) in buf.iter_mut().zip(&frequencies(grid)) {
        *v *= scale * Complex64::new(0.0, -xi * grid.x_min()).exp();
    }
    Ok(buf)
}

/// Inverse of [`fourier_transform`].
pub fn inverse_fourier_transform(
    hat: &[Complex64],
    grid: &SpatialGrid,
) -> Result<Vec<Complex64>> {
    if hat.len() != grid.len() {
        return Err(Error::GridDomain(format!(
            "sample count {} does not match grid size {}",
            hat.len(),
            grid.len()
        )));
    }
    let n = grid.len();
    let mut buf: Vec<Complex64> = hat
        .iter()
        .zip(&frequencies(grid))
        .map(|(&v, &xi)| v * Complex64::new(0.0, xi * grid.x_min()).exp())
        .collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    let scale = FOURIER_NORM * 2.0 * std::f64::consts::PI / (n as f64 * grid.spacing());
    for v in buf.iter_mut() {
        *v *= scale;
    }
    Ok(buf)
}

/// `m(H₀) f` through the FFT; the symbol is a function of `λ = xi²`.
pub fn apply_symbol_fft<M>(m: M, f: &[Complex64], grid: &SpatialGrid) -> Result<Vec<Complex64>>
where
    M: Fn(f64) -> Complex64,
{
    let mut hat = fourier_transform(f, grid)?;
    for (v, &xi) in hat.iter_mut().zip(&frequencies(grid)) {
        *v *= m(xi * xi);
    }
    inverse_fourier_transform(&hat, grid)
}
