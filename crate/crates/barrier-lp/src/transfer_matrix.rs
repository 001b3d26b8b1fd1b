//! Independent scattering solver for the square barrier.
//!
//! Solves the same eigenfunction problem as [`crate::eigen`] by composing
//! 2x2 interface-matching matrices instead of evaluating the closed-form
//! amplitudes. No code is shared with the closed forms, which makes this
//! module a cross-check oracle for them (`barrier-lp eigen --check
//! transfer-matrix` and the test suite both diff the two).

use num_complex::Complex64;

use crate::potential::BarrierPotential;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
struct Mat2 {
    m11: Complex64,
    m12: Complex64,
    m21: Complex64,
    m22: Complex64,
}

impl Mat2 {
    fn mul(&self, other: &Mat2) -> Mat2 {
        Mat2 {
            m11: self.m11 * other.m11 + self.m12 * other.m21,
            m12: self.m11 * other.m12 + self.m12 * other.m22,
            m21: self.m21 * other.m11 + self.m22 * other.m21,
            m22: self.m21 * other.m12 + self.m22 * other.m22,
        }
    }

    fn apply(&self, v: (Complex64, Complex64)) -> (Complex64, Complex64) {
        (
            self.m11 * v.0 + self.m12 * v.1,
            self.m21 * v.0 + self.m22 * v.1,
        )
    }
}

/// Matching matrix at `x0` between a region of wavenumber `k_left` and one
/// of `k_right`: maps `(a, b)` with `psi = a e^{i k x} + b e^{-i k x}` on
/// the left to the pair on the right, enforcing continuity of `psi` and
/// `psi'`.
fn interface(x0: f64, k_left: Complex64, k_right: Complex64) -> Mat2 {
    let kappa = k_left / k_right;
    let plus = 0.5 * (1.0 + kappa);
    let minus = 0.5 * (1.0 - kappa);
    Mat2 {
        m11: plus * (I * (k_left - k_right) * x0).exp(),
        m12: minus * (-I * (k_left + k_right) * x0).exp(),
        m21: minus * (I * (k_left + k_right) * x0).exp(),
        m22: plus * (-I * (k_left - k_right) * x0).exp(),
    }
}

/// Result of the matrix solve: asymptotic transmission/reflection
/// amplitudes and the full three-region profile for pointwise evaluation.
#[derive(Debug, Clone)]
pub struct Scattering {
    pub xi: f64,
    pub transmission: Complex64,
    pub reflection: Complex64,
    /// `(a, b, k)` per region, ordered left / middle / right.
    regions: [(Complex64, Complex64, Complex64); 3],
}

impl Scattering {
    /// Evaluates the scattering solution at `x`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let (a, b, k) = if x < -1.0 {
            self.regions[0]
        } else if x > 1.0 {
            self.regions[2]
        } else {
            self.regions[1]
        };
        a * (I * k * x).exp() + b * (-I * k * x).exp()
    }
}

/// Solves the barrier scattering problem at frequency `xi != 0` (signed:
/// positive frequencies come in from the left, negative from the right).
pub fn scattering(xi: f64, pot: &BarrierPotential) -> Scattering {
    let k_out = Complex64::new(xi, 0.0);
    // principal sqrt: real K above the barrier, i·rho below it
    let k_in = Complex64::new(xi * xi - pot.height(), 0.0).sqrt();

    let left = interface(-1.0, k_out, k_in);
    let right = interface(1.0, k_in, k_out);
    let total = right.mul(&left);

    if xi > 0.0 {
        // (1, R) on the left maps to (T, 0) on the right. Each interface
        // matrix has determinant k_left/k_right, so det(total) = 1 and
        // T = det/m22 = 1/m22 — the naive m11 + m12·R cancels to noise
        // under deep tunneling.
        let reflection = -total.m21 / total.m22;
        let transmission = 1.0 / total.m22;
        let one = Complex64::new(1.0, 0.0);
        let mid = left.apply((one, reflection));
        Scattering {
            xi,
            transmission,
            reflection,
            regions: [
                (one, reflection, k_out),
                (mid.0, mid.1, k_in),
                (transmission, Complex64::new(0.0, 0.0), k_out),
            ],
        }
    } else {
        // (T, 0) on the left maps to (1, R) on the right
        let transmission = 1.0 / total.m11;
        let reflection = total.m21 * transmission;
        let mid = left.apply((transmission, Complex64::new(0.0, 0.0)));
        Scattering {
            xi,
            transmission,
            reflection,
            regions: [
                (transmission, Complex64::new(0.0, 0.0), k_out),
                (mid.0, mid.1, k_in),
                (Complex64::new(1.0, 0.0), reflection, k_out),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_limit_transmits_everything() {
        let pot = BarrierPotential::free();
        let s = scattering(1.7, &pot);
        assert!((s.transmission - 1.0).norm() < 1e-14);
        assert!(s.reflection.norm() < 1e-14);
    }

    #[test]
    fn flux_is_conserved() {
        let pot = BarrierPotential::new(1.0).unwrap();
        for xi in [-3.0, -0.4, 0.2, 0.99, 1.01, 6.0] {
            let s = scattering(xi, &pot);
            let flux = s.transmission.norm_sqr() + s.reflection.norm_sqr();
            assert!((flux - 1.0).abs() < 1e-12, "flux {flux} at xi={xi}");
        }
    }

    #[test]
    fn profile_is_c1_at_interfaces() {
        let pot = BarrierPotential::new(2.0).unwrap();
        let s = scattering(0.8, &pot);
        let h = 1e-7;
        for edge in [-1.0f64, 1.0] {
            let left = (s.eval(edge - h) - s.eval(edge - 2.0 * h)) / h;
            let right = (s.eval(edge + 2.0 * h) - s.eval(edge + h)) / h;
            assert!((left - right).norm() < 1e-5);
        }
    }

    #[test]
    fn deep_tunneling_is_suppressed() {
        let pot = BarrierPotential::new(10.0).unwrap();
        let s = scattering(1.0, &pot);
        // e^{-4 rho} scale with rho ≈ 10
        assert!(s.transmission.norm_sqr() < 1e-15);
        assert!((s.reflection.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
