//! Spatial sampling grids and panelized Gauss-Legendre spectral grids.
//!
//! The spectral side carries the two hard constraints of the eigenfunction
//! integrals: panels never straddle `xi = 0` (where `e(x, xi)` jumps) or
//! `xi = ±eps` (the branch points of the interior exponent), and the node
//! count per panel follows an oscillation-resolution rule tied to the
//! spatial extent the kernel will be evaluated on.

use std::collections::HashMap;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::potential::BarrierPotential;

/// Uniform spatial grid. Must contain `[-3, 3]` (the barrier plus a
/// two-unit reflection margin) and at least 64 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) {
            return Err(Error::GridDomain(format!(
                "empty spatial range [{x_min}, {x_max}]"
            )));
        }
        if x_min > -3.0 || x_max < 3.0 {
            return Err(Error::GridDomain(format!(
                "grid [{x_min}, {x_max}] must contain [-3, 3]"
            )));
        }
        if n_points < 64 {
            return Err(Error::GridDomain(format!(
                "need at least 64 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// `[-extent, extent]` with `n_points` samples.
    pub fn symmetric(extent: f64, n_points: usize) -> Result<Self> {
        Self::new(-extent, extent, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() < 1e-12 * self.x_max.abs()
    }

    /// Largest `|x|` on the grid plus the two-unit reflection margin; the
    /// `X_max` entering the spectral node rule.
    pub fn oscillation_extent(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs()) + 2.0
    }

    /// Same span with `factor`-times denser sampling (original points are
    /// kept, `factor - 1` new points per cell).
    pub fn refine(&self, factor: usize) -> Self {
        Self {
            x_min: self.x_min,
            x_max: self.x_max,
            n_points: (self.n_points - 1) * factor + 1,
        }
    }

    /// Same spacing over a `factor`-times wider span.
    pub fn extended(&self, factor: u32) -> Self {
        let factor = factor.max(1) as f64;
        Self {
            x_min: factor * self.x_min,
            x_max: factor * self.x_max,
            n_points: (self.n_points - 1) * factor as usize + 1,
        }
    }

    /// Trapezoid weights: `h` inside, `h/2` at the ends.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i == self.n_points - 1 {
            0.5 * h
        } else {
            h
        }
    }

    pub fn integrate<F: Fn(usize) -> f64>(&self, f: F) -> f64 {
        (0..self.n_points)
            .map(|i| self.trapezoid_weight(i) * f(i))
            .sum()
    }

    /// Trapezoid `L^p` quasi-norm of samples, `sup` for `p = inf`.
    pub fn lp_norm(&self, samples: &[Complex64], p: f64) -> f64 {
        assert_eq!(samples.len(), self.n_points);
        if p.is_infinite() {
            return samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        let sum: f64 = (0..self.n_points)
            .map(|i| self.trapezoid_weight(i) * samples[i].norm().powf(p))
            .sum();
        sum.powf(1.0 / p)
    }

    pub fn l2_inner(&self, f: &[Complex64], g: &[Complex64]) -> Complex64 {
        (0..self.n_points)
            .map(|i| self.trapezoid_weight(i) * f[i].conj() * g[i])
            .sum()
    }
}

/// One quadrature panel `[lo, hi]` with its Gauss-Legendre degree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub lo: f64,
    pub hi: f64,
    pub node_count: usize,
}

/// Minimum admissible node count for a panel of width `width`:
/// `20 + ceil(10·width·x_extent/pi)`, plus `ceil(t·xi_peak²/pi)` when a
/// propagator phase `e^{-it xi²}` must also be resolved.
pub fn node_rule(width: f64, x_extent: f64, phase_time: f64, xi_peak: f64) -> usize {
    let oscillation = (10.0 * width * x_extent / std::f64::consts::PI).ceil() as usize;
    let phase = (phase_time.abs() * xi_peak * xi_peak / std::f64::consts::PI).ceil() as usize;
    20 + oscillation + phase
}

/// Panelized Gauss-Legendre grid over a union of frequency intervals.
#[derive(Debug, Clone)]
pub struct SpectralGrid {
    panels: Vec<Panel>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    excludes_origin: bool,
    x_extent: f64,
    phase_time: f64,
}

impl SpectralGrid {
    /// Covers `±[0, xi_max]`, split at the origin and at `±eps`, with the
    /// node rule driven by `grid`. The negative half mirrors the positive
    /// one node-for-node so reflection identities hold to rounding.
    pub fn covering(pot: &BarrierPotential, xi_max: f64, grid: &SpatialGrid) -> Result<Self> {
        Self::builder(pot, grid).covering(xi_max)
    }

    /// Covers `±[xi_lo, xi_hi]` (both signs), split at `±eps` if interior.
    pub fn for_support(
        pot: &BarrierPotential,
        xi_lo: f64,
        xi_hi: f64,
        grid: &SpatialGrid,
    ) -> Result<Self> {
        Self::builder(pot, grid).for_support(xi_lo, xi_hi)
    }

    pub fn builder<'a>(pot: &'a BarrierPotential, grid: &'a SpatialGrid) -> SpectralGridBuilder<'a> {
        SpectralGridBuilder {
            pot,
            grid,
            refine_level: 0,
            phase_time: 0.0,
            extra_extent: 0.0,
        }
    }

    pub fn panels(&self) -> &[Panel] {
        &self.panels
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn excludes_origin(&self) -> bool {
        self.excludes_origin
    }

    pub fn xi_max(&self) -> f64 {
        self.panels
            .iter()
            .flat_map(|p| [p.lo.abs(), p.hi.abs()])
            .fold(0.0, f64::max)
    }

    /// Largest propagator time the node rule was provisioned for.
    pub fn phase_time(&self) -> f64 {
        self.phase_time
    }

    pub fn x_extent(&self) -> f64 {
        self.x_extent
    }

    /// Quadrature integral of a complex-valued function sampled on the nodes.
    pub fn integrate<F: Fn(f64) -> Complex64>(&self, f: F) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `L^2` norm of node samples under the quadrature weights.
    pub fn l2_norm(&self, samples: &[Complex64]) -> f64 {
        assert_eq!(samples.len(), self.nodes.len());
        samples
            .iter()
            .zip(&self.weights)
            .map(|(z, &w)| w * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// SHA-256 of the panel layout; identifies the quadrature in reports.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for p in &self.panels {
            hasher.update(p.lo.to_le_bytes());
            hasher.update(p.hi.to_le_bytes());
            hasher.update(p.node_count.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Validates panel layout against the branch points of `pot` and the
    /// node rule for `grid`; hand-assembled grids go through this.
    pub fn validate(&self, pot: &BarrierPotential) -> Result<()> {
        let eps = pot.epsilon();
        for p in &self.panels {
            for brk in [0.0, eps, -eps] {
                if p.lo < brk && brk < p.hi {
                    return Err(Error::Resolution(format!(
                        "panel [{}, {}] straddles the breakpoint {brk}",
                        p.lo, p.hi
                    )));
                }
            }
            let need = node_rule(
                p.hi - p.lo,
                self.x_extent,
                self.phase_time,
                p.lo.abs().max(p.hi.abs()),
            );
            if p.node_count < need {
                return Err(Error::Resolution(format!(
                    "panel [{}, {}] has {} nodes, rule requires {need}",
                    p.lo, p.hi, p.node_count
                )));
            }
        }
        Ok(())
    }
}

pub struct SpectralGridBuilder<'a> {
    pot: &'a BarrierPotential,
    grid: &'a SpatialGrid,
    refine_level: u32,
    phase_time: f64,
    extra_extent: f64,
}

impl<'a> SpectralGridBuilder<'a> {
    /// Doubles every panel's node count `level` times.
    pub fn refine(mut self, level: u32) -> Self {
        self.refine_level = level;
        self
    }

    /// Provisions the node rule for the propagator phase `e^{-it xi²}` up
    /// to time `t`.
    pub fn phase_time(mut self, t: f64) -> Self {
        self.phase_time = t;
        self
    }

    /// Widens the oscillation extent entering the node rule. Kernel
    /// assembly oscillates like `e^{i xi (x - y)}`, so it passes the
    /// second grid's extent here.
    pub fn extra_extent(mut self, extent: f64) -> Self {
        self.extra_extent = extent;
        self
    }

    pub fn covering(self, xi_max: f64) -> Result<SpectralGrid> {
        if !(xi_max > 0.0) {
            return Err(Error::Resolution(format!("xi_max must be positive, got {xi_max}")));
        }
        self.assemble(0.0, xi_max)
    }

    pub fn for_support(self, xi_lo: f64, xi_hi: f64) -> Result<SpectralGrid> {
        if !(0.0 <= xi_lo && xi_lo < xi_hi) {
            return Err(Error::Resolution(format!(
                "bad support range [{xi_lo}, {xi_hi}]"
            )));
        }
        self.assemble(xi_lo, xi_hi)
    }

    fn assemble(self, xi_lo: f64, xi_hi: f64) -> Result<SpectralGrid> {
        let x_extent = self.grid.oscillation_extent() + self.extra_extent;
        let eps = self.pot.epsilon();

        // split at the branch point, then subdivide into panels narrow
        // enough that the node rule stays at a Gauss-Legendre degree with
        // good conditioning
        let mut cuts = vec![xi_lo, xi_hi];
        if eps > xi_lo && eps < xi_hi {
            cuts.insert(1, eps);
        }
        let max_width = (64.0 * std::f64::consts::PI / (10.0 * x_extent)).clamp(0.125, 4.0);

        let mut rules: HashMap<usize, (Vec<f64>, Vec<f64>)> = HashMap::new();
        let mut panels = Vec::new();
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for pair in cuts.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let pieces = ((hi - lo) / max_width).ceil().max(1.0) as usize;
            let width = (hi - lo) / pieces as f64;
            for k in 0..pieces {
                let a = lo + k as f64 * width;
                let b = if k + 1 == pieces { hi } else { a + width };
                let mut count = node_rule(b - a, x_extent, self.phase_time, a.abs().max(b.abs()));
                count <<= self.refine_level;
                let (ns, ws) = rules.entry(count).or_insert_with(|| legendre_rule(count));
                let c = 0.5 * (a + b);
                let s = 0.5 * (b - a);
                for (&n, &w) in ns.iter().zip(ws.iter()) {
                    nodes.push(c + s * n);
                    weights.push(s * w);
                }
                panels.push(Panel {
                    lo: a,
                    hi: b,
                    node_count: count,
                });
            }
        }

        // mirror the positive half onto the negative one
        let pos_panels = panels.clone();
        let n_pos = nodes.len();
        for p in pos_panels.iter().rev() {
            panels.push(Panel {
                lo: -p.hi,
                hi: -p.lo,
                node_count: p.node_count,
            });
        }
        for i in (0..n_pos).rev() {
            nodes.push(-nodes[i]);
            weights.push(weights[i]);
        }

        Ok(SpectralGrid {
            panels,
            nodes,
            weights,
            excludes_origin: xi_lo > 0.0,
            x_extent,
            phase_time: self.phase_time,
        })
    }
}

fn legendre_rule(count: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = GaussLegendre::new(NonZeroUsize::new(count).expect("positive node count"));
    // ascending node order for reproducible summation
    let mut pairs: Vec<(f64, f64)> = rule.nodes().copied().zip(rule.weights().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_grid_basics() {
        let g = SpatialGrid::symmetric(8.0, 65).unwrap();
        assert_eq!(g.point(0), -8.0);
        assert_eq!(g.point(64), 8.0);
        assert!((g.spacing() - 0.25).abs() < 1e-15);
        assert!(g.is_symmetric());
        let fine = g.refine(4);
        assert_eq!(fine.len(), 257);
        assert_eq!(fine.point(0), -8.0);
        // original points survive refinement
        assert!((fine.point(4) - g.point(1)).abs() < 1e-14);
    }

    #[test]
    fn spatial_grid_rejects_bad_domains() {
        assert!(SpatialGrid::new(-2.0, 8.0, 100).is_err());
        assert!(SpatialGrid::new(-8.0, 2.0, 100).is_err());
        assert!(SpatialGrid::symmetric(8.0, 32).is_err());
    }

    #[test]
    fn trapezoid_integrates_smooth_decay_spectrally() {
        let g = SpatialGrid::symmetric(10.0, 257).unwrap();
        let xs = g.points();
        let integral = g.integrate(|i| (-xs[i] * xs[i]).exp());
        assert!((integral - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gl_panels_integrate_oscillations() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(8.0, 257).unwrap();
        let sg = SpectralGrid::covering(&pot, 4.0, &grid).unwrap();
        // ∫_{-4}^{4} cos(9 x) dx, oscillation within the rule's budget
        let val = sg.integrate(|x| Complex64::new((9.0 * x).cos(), 0.0));
        let exact = 2.0 * (36.0f64).sin() / 9.0;
        assert!((val.re - exact).abs() < 1e-12, "got {} want {exact}", val.re);
        assert!(val.im.abs() < 1e-14);
    }

    #[test]
    fn panels_respect_breakpoints() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(8.0, 257).unwrap();
        let sg = SpectralGrid::covering(&pot, 4.0, &grid).unwrap();
        sg.validate(&pot).unwrap();
        assert!(!sg.excludes_origin());
        assert!(sg.nodes().iter().all(|&x| x != 0.0 && x.abs() != 1.0));
        // some panel must end exactly at eps
        assert!(sg.panels().iter().any(|p| p.hi == 1.0 || p.lo == 1.0));
    }

    #[test]
    fn mirrored_nodes() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(8.0, 257).unwrap();
        let sg = SpectralGrid::for_support(&pot, 2.0, 4.0, &grid).unwrap();
        assert!(sg.excludes_origin());
        let n = sg.len();
        for i in 0..n / 2 {
            assert_eq!(sg.nodes()[i], -sg.nodes()[n - 1 - i]);
            assert_eq!(sg.weights()[i], sg.weights()[n - 1 - i]);
        }
    }

    #[test]
    fn refinement_doubles_nodes_and_changes_hash() {
        let pot = BarrierPotential::new(1.0).unwrap();
        let grid = SpatialGrid::symmetric(8.0, 257).unwrap();
        let sg = SpectralGrid::covering(&pot, 4.0, &grid).unwrap();
        let fine = SpectralGrid::builder(&pot, &grid)
            .refine(1)
            .covering(4.0)
            .unwrap();
        assert_eq!(fine.len(), 2 * sg.len());
        assert_ne!(sg.hash(), fine.hash());
        assert_eq!(sg.hash(), SpectralGrid::covering(&pot, 4.0, &grid).unwrap().hash());
    }
}
