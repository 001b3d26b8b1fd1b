//! The generalized Fourier transform of `H`, its adjoint, and the
//! functional calculus `m(H) = F* m(xi²) F`.
//!
//! `F f(xi) = (2π)^{-1/2} ∫ f(x) conj(e(x, xi)) dx` diagonalizes `H` on its
//! absolutely continuous subspace (which is all of `L²` here: the barrier
//! has no bound states). The spatial integral is trapezoid on the uniform
//! grid — spectrally accurate for smooth decaying samples — and the
//! frequency integrals run over the panelized Gauss-Legendre nodes of a
//! [`SpectralGrid`], which never straddle `xi = 0` or `xi = ±eps`.
//!
//! Kernel assembly parallelizes over rows with a fixed per-row summation
//! order, so results are identical at any thread count.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::Eigenfunction;
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, SpectralGrid};
use crate::potential::BarrierPotential;

const FOURIER_NORM: f64 = 0.3989422804014327; // (2π)^{-1/2}

fn eigenfunctions(pot: &BarrierPotential, sg: &SpectralGrid) -> Result<Vec<Eigenfunction>> {
    sg.nodes()
        .iter()
        .map(|&xi| Eigenfunction::new(pot, xi))
        .collect()
}

/// Warn when samples fail the compact-support proxy (decay to `1e-10` of
/// the peak at the grid ends); the transform is still computed.
fn check_boundary_decay(f: &[Complex64], what: &str) {
    let peak = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let edge = f[0].norm().max(f[f.len() - 1].norm());
    if edge > 1e-10 * peak && peak > 0.0 {
        log::warn!(
            "{what}: samples reach {:.2e} of their peak at the grid boundary; \
             aliasing may contaminate the transform",
            edge / peak
        );
    }
}

/// `F f` sampled on the spectral nodes.
pub fn forward(
    f: &[Complex64],
    grid: &SpatialGrid,
    sg: &SpectralGrid,
    pot: &BarrierPotential,
) -> Result<Vec<Complex64>> {
    if f.len() != grid.len() {
        return Err(Error::GridDomain(format!(
            "sample count {} does not match grid size {}",
            f.len(),
            grid.len()
        )));
    }
    check_boundary_decay(f, "forward transform");
    let efs = eigenfunctions(pot, sg)?;
    let xs = grid.points();
    let weights: Vec<f64> = (0..grid.len()).map(|i| grid.trapezoid_weight(i)).collect();
    Ok(efs
        .par_iter()
        .map(|ef| {
            let mut acc = Complex64::default();
            for i in 0..xs.len() {
                acc += weights[i] * f[i] * ef.eval(xs[i]).conj();
            }
            FOURIER_NORM * acc
        })
        .collect())
}

/// `F* g` sampled on the spatial grid.
pub fn adjoint(
    g: &[Complex64],
    sg: &SpectralGrid,
    grid: &SpatialGrid,
    pot: &BarrierPotential,
) -> Result<Vec<Complex64>> {
    if g.len() != sg.len() {
        return Err(Error::GridDomain(format!(
            "sample count {} does not match node count {}",
            g.len(),
            sg.len()
        )));
    }
    let xs = grid.points();
    adjoint_at(g, sg, &xs, pot)
}

/// `F* g` at arbitrary points (used by the Peetre maximal functions on
/// refined grids).
pub fn adjoint_at(
    g: &[Complex64],
    sg: &SpectralGrid,
    xs: &[f64],
    pot: &BarrierPotential,
) -> Result<Vec<Complex64>> {
    if g.len() != sg.len() {
        return Err(Error::GridDomain(format!(
            "sample count {} does not match node count {}",
            g.len(),
            sg.len()
        )));
    }
    let efs = eigenfunctions(pot, sg)?;
    let ws = sg.weights();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let mut acc = Complex64::default();
            for q in 0..efs.len() {
                acc += ws[q] * g[q] * efs[q].eval(x);
            }
            FOURIER_NORM * acc
        })
        .collect())
}

/// `m(H) f = F* (m(xi²) · F f)`. The symbol is a function of the spectral
/// variable `λ = xi²`.
pub fn apply_symbol<M>(
    m: M,
    f: &[Complex64],
    grid: &SpatialGrid,
    sg: &SpectralGrid,
    pot: &BarrierPotential,
) -> Result<Vec<Complex64>>
where
    M: Fn(f64) -> Complex64 + Sync,
{
    let mut hat = forward(f, grid, sg, pot)?;
    for (h, &xi) in hat.iter_mut().zip(sg.nodes()) {
        *h *= m(xi * xi);
    }
    adjoint(&hat, sg, grid, pot)
}

/// Which integrand the kernel assembly uses on each side of
/// `∫ m(xi²) e(x,xi) conj(e(y,xi)) dxi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct KernelSides {
    /// differentiate `e(x, xi)` in `x`
    pub dx: bool,
    /// differentiate `conj(e(y, xi))` in `y`
    pub dy: bool,
}

/// Sampled kernel `m(H)(x, y)` on a grid pair, together with the symbol
/// and quadrature that produced it.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    /// row-major: `values[ix * ny + iy]`
    pub values: Vec<Complex64>,
    pub xgrid: SpatialGrid,
    pub ygrid: SpatialGrid,
    pub symbol: String,
    pub quadrature_hash: String,
    pub sides: KernelSides,
}

impl KernelMatrix {
    pub fn value(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[ix * self.ygrid.len() + iy]
    }

    /// `max |K(x,y) - conj(K(y,x))|`; requires identical grids. Zero in
    /// exact arithmetic for real symbols and the plain kernel.
    pub fn hermitian_residual(&self) -> f64 {
        assert_eq!(self.xgrid, self.ygrid, "hermitian check needs one grid");
        let n = self.xgrid.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.value(i, j) - self.value(j, i).conj()).norm());
            }
        }
        worst
    }

    /// `max |K(x,y) - K(-x,-y)|` on symmetric grids.
    pub fn reflection_residual(&self) -> f64 {
        assert!(
            self.xgrid.is_symmetric() && self.ygrid.is_symmetric(),
            "reflection check needs symmetric grids"
        );
        let (nx, ny) = (self.xgrid.len(), self.ygrid.len());
        let mut worst: f64 = 0.0;
        for i in 0..nx {
            for j in 0..ny {
                worst = worst.max((self.value(i, j) - self.value(nx - 1 - i, ny - 1 - j)).norm());
            }
        }
        worst
    }

    /// `max |K(x,y) - K(x+h, y+h)|` over the grid: vanishes when the
    /// kernel is a convolution (the free case).
    pub fn translation_residual(&self) -> f64 {
        assert!(
            (self.xgrid.spacing() - self.ygrid.spacing()).abs() < 1e-14,
            "translation check needs equal spacings"
        );
        let (nx, ny) = (self.xgrid.len(), self.ygrid.len());
        let mut worst: f64 = 0.0;
        for i in 0..nx - 1 {
            for j in 0..ny - 1 {
                worst = worst.max((self.value(i, j) - self.value(i + 1, j + 1)).norm());
            }
        }
        worst
    }

    /// `(K f)(x_i)` by trapezoid in `y`; the matrix-side route of
    /// `m(H) f`.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(f.len(), self.ygrid.len());
        let ny = self.ygrid.len();
        let wy: Vec<f64> = (0..ny).map(|j| self.ygrid.trapezoid_weight(j)).collect();
        (0..self.xgrid.len())
            .map(|i| {
                let mut acc = Complex64::default();
                for j in 0..ny {
                    acc += self.values[i * ny + j] * wy[j] * f[j];
                }
                acc
            })
            .collect()
    }

    /// CSV rows `x,y,re,im`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,re,im")?;
        let ny = self.ygrid.len();
        for i in 0..self.xgrid.len() {
            let x = self.xgrid.point(i);
            for j in 0..ny {
                let v = self.values[i * ny + j];
                writeln!(out, "{x},{},{},{}", self.ygrid.point(j), v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Row-major little-endian `(re, im)` f64 pairs; pair with
    /// [`KernelMatrix::sidecar`] for the layout metadata.
    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn sidecar(&self) -> KernelSidecar {
        KernelSidecar {
            layout: "row-major complex64 (re, im) little-endian".to_string(),
            rows: self.xgrid.len(),
            cols: self.ygrid.len(),
            xgrid: self.xgrid.clone(),
            ygrid: self.ygrid.clone(),
            symbol: self.symbol.clone(),
            quadrature_hash: self.quadrature_hash.clone(),
            sides: self.sides,
        }
    }
}

/// JSON companion of a binary kernel dump.
#[derive(Debug, Clone, Serialize)]
pub struct KernelSidecar {
    pub layout: String,
    pub rows: usize,
    pub cols: usize,
    pub xgrid: SpatialGrid,
    pub ygrid: SpatialGrid,
    pub symbol: String,
    pub quadrature_hash: String,
    pub sides: KernelSides,
}

/// Assembles `m(H)(x, y) = (2π)^{-1} ∫ m(xi²) e(x,xi) conj(e(y,xi)) dxi`
/// over the grid pair, one quadrature pass per row.
pub fn kernel_matrix<M>(
    m: M,
    label: &str,
    xgrid: &SpatialGrid,
    ygrid: &SpatialGrid,
    sg: &SpectralGrid,
    pot: &BarrierPotential,
    sides: KernelSides,
) -> Result<KernelMatrix>
where
    M: Fn(f64) -> Complex64 + Sync,
{
    let ys = ygrid.points();
    let values = kernel_rows(&m, xgrid, &ys, sg, pot, sides)?;
    Ok(KernelMatrix {
        values,
        xgrid: xgrid.clone(),
        ygrid: ygrid.clone(),
        symbol: label.to_string(),
        quadrature_hash: sg.hash(),
        sides,
    })
}

/// Kernel samples `K(x_i, y)` for an arbitrary list of `y`; flat row-major
/// `[ix * ys.len() + iy]`. The workhorse behind both [`kernel_matrix`] and
/// the column slices used by kernel-size and Hörmander experiments.
pub fn kernel_rows<M>(
    m: &M,
    xgrid: &SpatialGrid,
    ys: &[f64],
    sg: &SpectralGrid,
    pot: &BarrierPotential,
    sides: KernelSides,
) -> Result<Vec<Complex64>>
where
    M: Fn(f64) -> Complex64 + Sync,
{
    let efs = eigenfunctions(pot, sg)?;
    let nodes = sg.nodes();
    let ws = sg.weights();
    let nq = nodes.len();
    let ny = ys.len();

    // right factor: w_q · m(xi_q²) · conj(e(y, xi_q)) / 2π
    let mut right = vec![Complex64::default(); nq * ny];
    right
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(q, chunk)| {
            let scale = ws[q] * m(nodes[q] * nodes[q]) / (2.0 * std::f64::consts::PI);
            for (iy, &y) in ys.iter().enumerate() {
                let e = if sides.dy {
                    efs[q].eval_dx(y)
                } else {
                    efs[q].eval(y)
                };
                chunk[iy] = scale * e.conj();
            }
        });

    let xs = xgrid.points();
    let mut values = vec![Complex64::default(); xs.len() * ny];
    values
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(ix, row)| {
            let x = xs[ix];
            for q in 0..nq {
                let left = if sides.dx {
                    efs[q].eval_dx(x)
                } else {
                    efs[q].eval(x)
                };
                let base = q * ny;
                for iy in 0..ny {
                    row[iy] += left * right[base + iy];
                }
            }
        });
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicSystem, FamilyId, SystemKind};
    use crate::functions::band_limit;

    fn gaussian(grid: &SpatialGrid, width: f64, modulation: f64) -> Vec<Complex64> {
        grid.points()
            .iter()
            .map(|&x| {
                Complex64::new(0.0, modulation * x).exp()
                    * (-x * x / (2.0 * width * width)).exp()
            })
            .collect()
    }

    fn setup() -> (BarrierPotential, SpatialGrid, SpectralGrid) {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(12.0, 577).unwrap();
        let sg = SpectralGrid::covering(&pot, 10.0, &grid).unwrap();
        (pot, grid, sg)
    }

    /// Gaussian projected onto `lambda <= 50`, well inside the coverage of
    /// [`setup`]'s spectral grid.
    fn band_limited(
        grid: &SpatialGrid,
        sg: &SpectralGrid,
        pot: &BarrierPotential,
        width: f64,
        modulation: f64,
    ) -> Vec<Complex64> {
        band_limit(&gaussian(grid, width, modulation), 25.0, 50.0, grid, sg, pot).unwrap()
    }

    #[test]
    fn free_forward_matches_gaussian_transform() {
        // F of exp(-x²/2) under the free operator is exp(-xi²/2)
        let pot = BarrierPotential::free();
        let grid = SpatialGrid::symmetric(12.0, 577).unwrap();
        let sg = SpectralGrid::covering(&pot, 6.0, &grid).unwrap();
        let f = gaussian(&grid, 1.0, 0.0);
        let hat = forward(&f, &grid, &sg, &pot).unwrap();
        for (q, &xi) in sg.nodes().iter().enumerate() {
            let expect = (-xi * xi / 2.0).exp();
            assert!(
                (hat[q].re - expect).abs() <= 1e-8 * 1.0f64.max(expect),
                "xi={xi}: {} vs {expect}",
                hat[q].re
            );
            assert!(hat[q].im.abs() <= 1e-10);
        }
    }

    #[test]
    fn linearity() {
        let (pot, grid, sg) = setup();
        let f = gaussian(&grid, 1.0, 2.0);
        let g = gaussian(&grid, 0.7, -1.0);
        let alpha = Complex64::new(1.3, -0.4);
        let combo: Vec<Complex64> = f.iter().zip(&g).map(|(&a, &b)| alpha * a + b).collect();
        let lhs = forward(&combo, &grid, &sg, &pot).unwrap();
        let ff = forward(&f, &grid, &sg, &pot).unwrap();
        let fg = forward(&g, &grid, &sg, &pot).unwrap();
        for q in 0..lhs.len() {
            assert!((lhs[q] - (alpha * ff[q] + fg[q])).norm() <= 1e-12);
        }
    }

    #[test]
    fn plancherel_for_barrier() {
        let (pot, grid, sg) = setup();
        let f = gaussian(&grid, 1.0, 1.5);
        let hat = forward(&f, &grid, &sg, &pot).unwrap();
        let ratio = sg.l2_norm(&hat) / grid.lp_norm(&f, 2.0);
        assert!(
            (ratio - 1.0).abs() <= 1e-6,
            "Plancherel ratio off by {:e}",
            ratio - 1.0
        );
    }

    #[test]
    fn round_trip_band_limited() {
        let (pot, grid, sg) = setup();
        let f = band_limited(&grid, &sg, &pot, 1.0, 1.5);
        let hat = forward(&f, &grid, &sg, &pot).unwrap();
        let back = adjoint(&hat, &sg, &grid, &pot).unwrap();
        let worst = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "round-trip error {worst}");
    }

    #[test]
    fn adjointness_inner_products() {
        let (pot, grid, sg) = setup();
        let f = gaussian(&grid, 0.8, 2.0);
        let hat_g: Vec<Complex64> = sg
            .nodes()
            .iter()
            .map(|&xi| Complex64::new((-(xi - 1.0) * (xi - 1.0)).exp(), 0.3 * xi.cos()))
            .collect();
        let ff = forward(&f, &grid, &sg, &pot).unwrap();
        // <Ff, g> over the spectral nodes
        let lhs: Complex64 = (0..sg.len())
            .map(|q| sg.weights()[q] * ff[q].conj() * hat_g[q])
            .sum();
        let fstar_g = adjoint(&hat_g, &sg, &grid, &pot).unwrap();
        let rhs = grid.l2_inner(&f, &fstar_g);
        assert!(
            (lhs - rhs).norm() <= 1e-8,
            "adjointness gap {}",
            (lhs - rhs).norm()
        );
    }

    #[test]
    fn identity_symbol_is_identity() {
        let (pot, grid, sg) = setup();
        let f = band_limited(&grid, &sg, &pot, 1.2, -1.0);
        let out = apply_symbol(|_| Complex64::new(1.0, 0.0), &f, &grid, &sg, &pot).unwrap();
        let worst = f
            .iter()
            .zip(&out)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6);
    }

    #[test]
    fn reconstruction_from_bands() {
        let (pot, grid, sg) = setup();
        let sys =
            DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 2).unwrap();
        let f = band_limited(&grid, &sg, &pot, 1.0, 1.0);
        let mut sum = apply_symbol(
            |l| Complex64::new(sys.head(l) * sys.head_dual(l), 0.0),
            &f,
            &grid,
            &sg,
            &pot,
        )
        .unwrap();
        for j in 1..=9 {
            let term = apply_symbol(
                |l| Complex64::new(sys.pair(j, l), 0.0),
                &f,
                &grid,
                &sg,
                &pot,
            )
            .unwrap();
            for (s, t) in sum.iter_mut().zip(&term) {
                *s += t;
            }
        }
        let worst = f
            .iter()
            .zip(&sum)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-6, "reconstruction error {worst}");
    }

    #[test]
    fn symbol_composition() {
        // extent 20 leaves enough room for the spatial tail of the
        // band-limited input; the homomorphism error tracks that tail
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(20.0, 961).unwrap();
        let sg = SpectralGrid::covering(&pot, 10.0, &grid).unwrap();
        let f = band_limited(&grid, &sg, &pot, 1.0, 1.0);
        let m1 = |l: f64| Complex64::new(1.0 / (1.0 + l), 0.0);
        let m2 = |l: f64| Complex64::new((-0.1 * l).exp(), 0.0);
        let once = apply_symbol(|l| m1(l) * m2(l), &f, &grid, &sg, &pot).unwrap();
        let twice = apply_symbol(
            m2,
            &apply_symbol(m1, &f, &grid, &sg, &pot).unwrap(),
            &grid,
            &sg,
            &pot,
        )
        .unwrap();
        let worst = once
            .iter()
            .zip(&twice)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "composition gap {worst}");
    }

    #[test]
    fn free_kernel_is_translation_invariant() {
        let pot = BarrierPotential::free();
        let grid = SpatialGrid::symmetric(6.0, 97).unwrap();
        let sys =
            DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 2).unwrap();
        let j = 6;
        let sg = SpectralGrid::for_support(
            &pot,
            2f64.powf((j as f64 - 2.0) / 2.0),
            2f64.powf(j as f64 / 2.0),
            &grid,
        )
        .unwrap();
        let k = kernel_matrix(
            |l| Complex64::new(sys.eval_band(j, l), 0.0),
            "band-6",
            &grid,
            &grid,
            &sg,
            &pot,
            KernelSides::default(),
        )
        .unwrap();
        assert!(k.translation_residual() <= 1e-8);
    }

    #[test]
    fn kernel_symmetries_and_consistency() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(6.0, 97).unwrap();
        let sys =
            DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 2).unwrap();
        let j = 4;
        let sg = SpectralGrid::covering(&pot, 2f64.powf(j as f64 / 2.0), &grid).unwrap();
        let band = |l: f64| Complex64::new(sys.eval_band(j, l), 0.0);
        let k = kernel_matrix(band, "band-4", &grid, &grid, &sg, &pot, KernelSides::default())
            .unwrap();
        assert!(
            k.hermitian_residual() <= 1e-10,
            "hermitian {}",
            k.hermitian_residual()
        );
        assert!(
            k.reflection_residual() <= 1e-10,
            "reflection {}",
            k.reflection_residual()
        );

        // matrix route equals transform route on a smooth function
        let wide = SpatialGrid::symmetric(12.0, 577).unwrap();
        let sgw = SpectralGrid::covering(&pot, 10.0, &wide).unwrap();
        let f_wide = gaussian(&wide, 1.0, 0.5);
        let via_transform = apply_symbol(band, &f_wide, &wide, &sgw, &pot).unwrap();
        let f_grid = gaussian(&grid, 1.0, 0.5);
        let via_matrix = k.apply(&f_grid);
        // compare on the smaller grid's points
        for (i, &x) in grid.points().iter().enumerate() {
            let iw = ((x - wide.x_min()) / wide.spacing()).round() as usize;
            assert!((wide.point(iw) - x).abs() < 1e-12);
            assert!(
                (via_matrix[i] - via_transform[iw]).norm() <= 1e-6,
                "matrix-vs-transform gap {} at x={x}",
                (via_matrix[i] - via_transform[iw]).norm()
            );
        }
    }

    #[test]
    fn quadrature_self_convergence() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(6.0, 65).unwrap();
        let sys =
            DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 2).unwrap();
        let j = 6;
        let lo = 2f64.powf((j as f64 - 2.0) / 2.0);
        let hi = 2f64.powf(j as f64 / 2.0);
        let band = |l: f64| Complex64::new(sys.eval_band(j, l), 0.0);
        let coarse = {
            let sg = SpectralGrid::builder(&pot, &grid)
                .extra_extent(grid.oscillation_extent())
                .for_support(lo, hi)
                .unwrap();
            kernel_matrix(band, "band", &grid, &grid, &sg, &pot, KernelSides::default()).unwrap()
        };
        let fine = {
            let sg = SpectralGrid::builder(&pot, &grid)
                .extra_extent(grid.oscillation_extent())
                .refine(1)
                .for_support(lo, hi)
                .unwrap();
            kernel_matrix(band, "band", &grid, &grid, &sg, &pot, KernelSides::default()).unwrap()
        };
        let worst = coarse
            .values
            .iter()
            .zip(&fine.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-8, "node doubling moved kernel values by {worst}");
    }
}
