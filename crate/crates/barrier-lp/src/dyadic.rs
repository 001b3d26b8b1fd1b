//! Smooth dyadic systems `(Phi, phi, Psi, psi)`.
//!
//! Requirements on the quadruple:
//!
//! - `supp Phi, supp Psi ⊆ [-1, 1]`, with `|Phi|, |Psi| >= c > 0` on
//!   `|xi| <= 1/2`;
//! - `supp phi, supp psi ⊆ {1/4 <= |xi| <= 1}`, with `|phi|, |psi| >= c > 0`
//!   on `3/8 <= |xi| <= 7/8`;
//! - `Phi(xi)Psi(xi) + Σ_{j>=1} phi(2^{-j}xi) psi(2^{-j}xi) = 1` for every
//!   `xi` (inhomogeneous), or `Σ_{j in Z} = 1` for `xi != 0` (homogeneous).
//!
//! The construction normalizes a `C^inf` bump by its own dyadic sum. Radii
//! are reduced to `[1, 2)` by exact power-of-two scalings, so the telescoping
//! denominator is evaluated bit-identically across octaves and the partition
//! holds to rounding, not merely to quadrature accuracy. Two families are
//! provided so construction-independence of the induced norms is testable:
//! a self-dual symmetric bump, and a tilted bump split asymmetrically
//! between `phi` and `psi`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    /// Head cutoff plus bands `j >= 1`.
    Inhomogeneous,
    /// Bands over all of `Z`, no head.
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyId {
    /// `phi = psi = sqrt(w)` with a symmetric bump profile.
    SymmetricBump,
    /// Tilted bump, split `phi = w^0.4`, `psi = w^0.6`.
    SkewedSplit,
}

impl std::fmt::Display for FamilyId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyId::SymmetricBump => write!(f, "symmetric-bump"),
            FamilyId::SkewedSplit => write!(f, "skewed-split"),
        }
    }
}

/// `r = r0 · 2^m` with `r0 in [1, 2)`; both scalings are exact.
fn normalize(r: f64) -> (f64, i32) {
    let mut m = r.log2().floor() as i32;
    let mut r0 = r / 2f64.powi(m);
    if r0 < 1.0 {
        r0 *= 2.0;
        m -= 1;
    } else if r0 >= 2.0 {
        r0 /= 2.0;
        m += 1;
    }
    (r0, m)
}

/// The normalized band-pair profile: `u/s` where `u` is a bump supported on
/// `(1/4, 1)` and `s` its dyadic-periodic sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct Profile {
    exponent: f64,
    tilt: f64,
}

impl Profile {
    fn u(&self, r: f64) -> f64 {
        if r <= 0.25 || r >= 1.0 {
            return 0.0;
        }
        // affine (1/4, 1) -> (-1, 1)
        let m = (8.0 * r - 5.0) / 3.0;
        (-self.exponent / (1.0 - m * m) + self.tilt * m).exp()
    }

    /// `Σ_k u(2^k r)`; only the octave pair of `r0` contributes.
    fn s(&self, r0: f64) -> f64 {
        self.u(0.25 * r0) + self.u(0.5 * r0)
    }

    /// `(phi psi)(xi)` as a function of `r = |xi|`.
    fn w(&self, r: f64) -> f64 {
        if r <= 0.25 || r >= 1.0 || !r.is_finite() {
            return 0.0;
        }
        let (r0, _) = normalize(r);
        self.u(r) / self.s(r0)
    }

    /// `(Phi Psi)(xi) = Σ_{k>=0} w(2^k r)`: exactly 1 below `r = 1/2`, a
    /// partial octave sum up to the support edge at `r = 1`.
    fn head(&self, r: f64) -> f64 {
        if r == 0.0 {
            return 1.0;
        }
        if r >= 1.0 || !r.is_finite() {
            return 0.0;
        }
        let (r0, m) = normalize(r);
        let mut acc = 0.0;
        if -2 - m >= 0 {
            acc += self.u(0.25 * r0);
        }
        if -1 - m >= 0 {
            acc += self.u(0.5 * r0);
        }
        acc / self.s(r0)
    }
}

/// A constructed dyadic system. Immutable after construction; evaluation is
/// pure, so values can be shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicSystem {
    kind: SystemKind,
    family: FamilyId,
    smoothness_order: u32,
    profile: Profile,
    /// exponent of `phi` in the split `phi psi = w` (`psi` takes the rest)
    split: f64,
    band_scale: f64,
    head_lower_bound: f64,
    band_lower_bound: f64,
}

impl DyadicSystem {
    /// Builds a system of the given family. `smoothness_order >= 2` scales
    /// the bump exponent (steeper interior, flatter edges for larger
    /// orders). Fails if the realized lower bound on a mandated set falls
    /// below `1e-8`.
    pub fn build(kind: SystemKind, family: FamilyId, smoothness_order: u32) -> Result<Self> {
        if smoothness_order < 2 {
            return Err(Error::InvalidParameter(format!(
                "smoothness order must be at least 2, got {smoothness_order}"
            )));
        }
        let (tilt, split) = match family {
            FamilyId::SymmetricBump => (0.0, 0.5),
            FamilyId::SkewedSplit => (0.7, 0.4),
        };
        let mut sys = Self {
            kind,
            family,
            smoothness_order,
            profile: Profile {
                exponent: smoothness_order as f64 / 2.0,
                tilt,
            },
            split,
            band_scale: 1.0,
            head_lower_bound: 0.0,
            band_lower_bound: 0.0,
        };
        let report = sys.check(512);
        sys.head_lower_bound = report.head_lower_bound;
        sys.band_lower_bound = report.band_lower_bound;
        let c = sys.band_lower_bound.min(match kind {
            SystemKind::Inhomogeneous => sys.head_lower_bound,
            SystemKind::Homogeneous => f64::INFINITY,
        });
        if c < 1e-8 {
            return Err(Error::DyadicConstruction {
                c,
                family: family.to_string(),
            });
        }
        Ok(sys)
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn family(&self) -> FamilyId {
        self.family
    }

    /// `Phi(xi)`.
    pub fn head(&self, xi: f64) -> f64 {
        powsplit(self.profile.head(xi.abs()), self.split)
    }

    /// `Psi(xi)`.
    pub fn head_dual(&self, xi: f64) -> f64 {
        powsplit(self.profile.head(xi.abs()), 1.0 - self.split)
    }

    /// `phi(xi)`.
    pub fn band(&self, xi: f64) -> f64 {
        self.band_scale * powsplit(self.profile.w(xi.abs()), self.split)
    }

    /// `psi(xi)`.
    pub fn band_dual(&self, xi: f64) -> f64 {
        powsplit(self.profile.w(xi.abs()), 1.0 - self.split)
    }

    /// `phi_j(xi)`: the head for `j = 0` (inhomogeneous), `phi(2^{-j} xi)`
    /// for `j >= 1`, and zero for negative `j`. Homogeneous systems scale
    /// the band for every integer `j`.
    pub fn eval_band(&self, j: i32, xi: f64) -> f64 {
        match self.kind {
            SystemKind::Inhomogeneous => match j {
                0 => self.head(xi),
                _ if j < 0 => 0.0,
                _ => self.band(xi * 2f64.powi(-j)),
            },
            SystemKind::Homogeneous => self.band(xi * 2f64.powi(-j)),
        }
    }

    /// `psi_j(xi)`; same indexing as [`DyadicSystem::eval_band`].
    pub fn eval_band_dual(&self, j: i32, xi: f64) -> f64 {
        match self.kind {
            SystemKind::Inhomogeneous => match j {
                0 => self.head_dual(xi),
                _ if j < 0 => 0.0,
                _ => self.band_dual(xi * 2f64.powi(-j)),
            },
            SystemKind::Homogeneous => self.band_dual(xi * 2f64.powi(-j)),
        }
    }

    /// `(phi psi)_j (xi)`.
    pub fn pair(&self, j: i32, xi: f64) -> f64 {
        self.eval_band(j, xi) * self.eval_band_dual(j, xi)
    }

    /// The partition sum at `xi` through the exposed functions, truncated
    /// where supports vanish.
    pub fn partition(&self, xi: f64) -> f64 {
        let r = xi.abs();
        match self.kind {
            SystemKind::Inhomogeneous => {
                let mut acc = self.head(xi) * self.head_dual(xi);
                if r > 0.25 {
                    let top = (r.log2().ceil() as i32 + 2).max(1);
                    for j in 1..=top {
                        acc += self.pair(j, xi);
                    }
                }
                acc
            }
            SystemKind::Homogeneous => {
                if r == 0.0 {
                    return 0.0;
                }
                let (_, m) = normalize(r);
                // active window is {m+1, m+2}; pad one on each side
                (m..=m + 3).map(|j| self.pair(j, xi)).sum()
            }
        }
    }

    /// Probes supports, lower bounds, and the partition identity;
    /// `probe_count >= 100` pseudo-random points plus the dyadic
    /// breakpoints. Never fails: the report carries pass/fail flags.
    pub fn check(&self, probe_count: usize) -> SystemReport {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0dad1c);
        let mut partition_max_deviation: f64 = 0.0;
        let probe = |xi: f64, dev: &mut f64| {
            let target = match self.kind {
                SystemKind::Inhomogeneous => 1.0,
                SystemKind::Homogeneous => {
                    if xi == 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                }
            };
            *dev = dev.max((self.partition(xi) - target).abs());
        };
        for _ in 0..probe_count {
            probe(rng.random_range(-64.0..64.0), &mut partition_max_deviation);
        }
        // dyadic breakpoints and their immediate neighborhoods
        for j in 0..=8 {
            for base in [0.25, 0.375, 0.5, 0.875, 1.0] {
                let xi = base * 2f64.powi(j);
                for delta in [-1e-9, 0.0, 1e-9] {
                    probe(xi + delta, &mut partition_max_deviation);
                    probe(-xi + delta, &mut partition_max_deviation);
                }
            }
        }
        if matches!(self.kind, SystemKind::Homogeneous) {
            // extended range below the unit octave
            for k in 1..=30 {
                probe(2f64.powi(-k) * 1.3, &mut partition_max_deviation);
            }
            probe(1e-6, &mut partition_max_deviation);
        }

        let samples = 1 + probe_count / 4;
        let mut head_lower_bound = f64::INFINITY;
        let mut band_lower_bound = f64::INFINITY;
        let mut head_support_leak: f64 = 0.0;
        let mut band_support_leak: f64 = 0.0;
        for i in 0..=samples {
            let t = i as f64 / samples as f64;
            // |Phi|, |Psi| >= c on |xi| <= 1/2
            let xi = -0.5 + t;
            head_lower_bound = head_lower_bound
                .min(self.head(xi).abs())
                .min(self.head_dual(xi).abs());
            // |phi|, |psi| >= c on 3/8 <= |xi| <= 7/8
            let xi = (0.375 + 0.5 * t) * if i % 2 == 0 { 1.0 } else { -1.0 };
            band_lower_bound = band_lower_bound
                .min(self.band(xi).abs())
                .min(self.band_dual(xi).abs());
            // supports
            let outside = 1.0 + 63.0 * t;
            head_support_leak = head_support_leak
                .max(self.head(outside).abs())
                .max(self.head(-outside).abs());
            band_support_leak = band_support_leak
                .max(self.band(outside).abs())
                .max(self.band(-outside).abs())
                .max(self.band(0.25 * t).abs());
        }

        let partition_ok = partition_max_deviation <= 1e-12;
        let bounds_ok = band_lower_bound >= 1e-8
            && (matches!(self.kind, SystemKind::Homogeneous) || head_lower_bound >= 1e-8);
        let supports_ok = head_support_leak == 0.0 && band_support_leak == 0.0;
        SystemReport {
            probes: probe_count,
            partition_max_deviation,
            head_lower_bound,
            band_lower_bound,
            head_support_leak,
            band_support_leak,
            partition_ok,
            bounds_ok,
            supports_ok,
            pass: partition_ok && bounds_ok && supports_ok,
        }
    }

    pub fn descriptor(&self) -> SystemDescriptor {
        SystemDescriptor {
            kind: self.kind,
            family_id: self.family,
            smoothness_order: self.smoothness_order,
            head_lower_bound: self.head_lower_bound,
            band_lower_bound: self.band_lower_bound,
            truncation: None,
        }
    }

    #[cfg(test)]
    fn with_band_scale(mut self, scale: f64) -> Self {
        self.band_scale = scale;
        self
    }
}

fn powsplit(w: f64, t: f64) -> f64 {
    if t == 0.5 {
        w.sqrt()
    } else {
        w.powf(t)
    }
}

/// Serializable identity of a system, embedded in run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemDescriptor {
    pub kind: SystemKind,
    pub family_id: FamilyId,
    pub smoothness_order: u32,
    pub head_lower_bound: f64,
    pub band_lower_bound: f64,
    /// band range used by a norm computation, when applicable
    pub truncation: Option<(i32, i32)>,
}

/// Measured constants and pass/fail flags from [`DyadicSystem::check`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemReport {
    pub probes: usize,
    pub partition_max_deviation: f64,
    pub head_lower_bound: f64,
    pub band_lower_bound: f64,
    pub head_support_leak: f64,
    pub band_support_leak: f64,
    pub partition_ok: bool,
    pub bounds_ok: bool,
    pub supports_ok: bool,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_system() -> DyadicSystem {
        DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 2).unwrap()
    }

    #[test]
    fn head_covers_origin_alone() {
        let sys = default_system();
        assert_eq!(sys.head(0.0) * sys.head_dual(0.0), 1.0);
        for j in 1..12 {
            assert_eq!(sys.eval_band(j, 0.0), 0.0);
        }
    }

    #[test]
    fn band_support_arithmetic() {
        let sys = default_system();
        // 2^{-1}·0.6 = 0.3 lies inside [1/4, 1]
        assert!(sys.eval_band(1, 0.6) != 0.0);
        // 2^{-3}·3 = 0.375 sits in the mandated lower-bound zone
        assert!(sys.eval_band(3, 3.0) >= 1e-2);
        // 2^{-3}·1 = 0.125 < 1/4
        assert_eq!(sys.eval_band(3, 1.0), 0.0);
        // vanishing outside [2^{j-2}, 2^j]
        assert_eq!(sys.eval_band(3, 8.0 + 1e-9), 0.0);
        assert_eq!(sys.eval_band(3, 2.0 - 1e-9), 0.0);
    }

    #[test]
    fn symbol_on_spectrum_support() {
        // phi_j(xi²) is supported in |xi| in [2^{(j-2)/2}, 2^{j/2}]
        let sys = default_system();
        let j = 5;
        let lo = 2f64.powf((j as f64 - 2.0) / 2.0);
        let hi = 2f64.powf(j as f64 / 2.0);
        assert_eq!(sys.eval_band(j, (lo * 0.999).powi(2)), 0.0);
        assert_eq!(sys.eval_band(j, (hi * 1.001).powi(2)), 0.0);
        assert!(sys.eval_band(j, (0.5 * (lo + hi)).powi(2)) > 0.0);
    }

    #[test]
    fn partition_of_unity_both_families() {
        for family in [FamilyId::SymmetricBump, FamilyId::SkewedSplit] {
            let sys = DyadicSystem::build(SystemKind::Inhomogeneous, family, 2).unwrap();
            let report = sys.check(10_000);
            assert!(
                report.partition_max_deviation <= 1e-12,
                "{family}: deviation {}",
                report.partition_max_deviation
            );
            assert!(report.pass, "{family}: {report:?}");
        }
    }

    #[test]
    fn homogeneous_partition_down_to_tiny_xi() {
        let sys =
            DyadicSystem::build(SystemKind::Homogeneous, FamilyId::SymmetricBump, 2).unwrap();
        let report = sys.check(10_000);
        assert!(report.pass, "{report:?}");
        assert!((sys.partition(1e-6) - 1.0).abs() <= 1e-10);
        assert_eq!(sys.partition(0.0), 0.0);
    }

    #[test]
    fn corrupted_band_is_detected() {
        let sys = default_system().with_band_scale(0.9);
        let report = sys.check(2_000);
        assert!(!report.partition_ok);
        assert!(!report.pass);
        // deviation is on the order of 0.1 · max(phi psi)
        assert!(report.partition_max_deviation > 0.01);
        assert!(report.partition_max_deviation < 0.2);
    }

    #[test]
    fn at_most_two_consecutive_bands_active() {
        let sys = default_system();
        for &xi in &[0.3, 0.7, 1.0, 5.3, 41.0] {
            let active: Vec<i32> = (0..=12).filter(|&j| sys.eval_band(j, xi) != 0.0).collect();
            assert!(active.len() <= 2, "xi={xi}: active bands {active:?}");
            if active.len() == 2 {
                assert_eq!(active[1] - active[0], 1);
            }
        }
    }

    #[test]
    fn skewed_family_differs_but_multiplies_back() {
        let skew = DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SkewedSplit, 2).unwrap();
        let xi = 0.6;
        assert!((skew.band(xi) - skew.band_dual(xi)).abs() > 1e-3);
        let sym = default_system();
        assert!((sym.band(xi) - sym.band_dual(xi)).abs() < 1e-15);
    }

    #[test]
    fn rejects_low_smoothness() {
        assert!(DyadicSystem::build(SystemKind::Inhomogeneous, FamilyId::SymmetricBump, 1).is_err());
    }

    proptest! {
        #[test]
        fn prop_partition_everywhere(xi in -100.0f64..100.0) {
            let sys = default_system();
            prop_assert!((sys.partition(xi) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn prop_band_nonnegative_and_bounded(xi in -100.0f64..100.0, j in 0i32..14) {
            let sys = default_system();
            let v = sys.eval_band(j, xi);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }
}
