//! Closed-form generalized eigenfunctions of `H = -d²/dx² + eps²·chi_[-1,1]`.
//!
//! For every `xi != 0` the operator has a bounded scattering solution
//! `e(x, xi)` of `H e = xi² e`; the branch `e_+` (for `xi > 0`) describes a
//! wave incoming from the left, `e_-` (for `xi < 0`) one incoming from the
//! right. Outside the barrier both are combinations of plane waves whose
//! amplitudes are the transmission/reflection coefficients; inside, the
//! profile is hyperbolic (`|xi| < eps`, tunneling) or trigonometric
//! (`|xi| > eps`), handled here by one complex-valued code path through
//! `rho(xi)`.
//!
//! Everything in this module is a pure function of its arguments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::BarrierPotential;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Spectral regime of a frequency relative to the barrier height.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// `|xi| > eps`: the interior wavenumber `K = sqrt(xi² - eps²)` is real.
    Oscillatory,
    /// `|xi| <= eps`: the interior profile decays/grows like `exp(±rho·x)`.
    Evanescent,
}

/// The interior exponent `rho(xi)`: `i·sqrt(xi² - eps²)` above the barrier
/// threshold, `sqrt(eps² - xi²)` below it. `|rho|` is continuous in `xi`
/// and vanishes exactly at `|xi| = eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoValue {
    pub value: Complex64,
    pub regime: Regime,
}

pub fn rho(xi: f64, pot: &BarrierPotential) -> RhoValue {
    let eps = pot.epsilon();
    if xi.abs() > eps {
        RhoValue {
            value: Complex64::new(0.0, (xi * xi - eps * eps).sqrt()),
            regime: Regime::Oscillatory,
        }
    } else {
        RhoValue {
            value: Complex64::new((eps * eps - xi * xi).sqrt(), 0.0),
            regime: Regime::Evanescent,
        }
    }
}

/// Branch selector: `e_+` carries `xi > 0`, `e_-` carries `xi < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn of(xi: f64) -> Result<Self> {
        if xi > 0.0 {
            Ok(Branch::Plus)
        } else if xi < 0.0 {
            Ok(Branch::Minus)
        } else {
            Err(Error::ZeroFrequency)
        }
    }
}

/// The six piecewise amplitudes of `e(x, xi)` at one frequency:
/// `a e^{i xi x} + a' e^{-i xi x}` on `x < -1`,
/// `b e^{rho x} + b' e^{-rho x}` on `|x| <= 1`,
/// `c e^{i xi x} + c' e^{-i xi x}` on `x > 1`.
///
/// On the plus branch `a = 1`, `c' = 0` (unit wave incoming from the left;
/// `c` is the transmission coefficient and `a'` the reflection); on the
/// minus branch `c = 1`, `a' = 0`.
///
/// `b` and `b'` separately diverge like `1/rho` at the branch points
/// `|xi| = eps`; the combination evaluated by [`Eigenfunction`] stays
/// finite there. The scattering data `a, a', c, c'` are analytic across
/// `|xi| = eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenCoefficients {
    pub a: Complex64,
    pub a_prime: Complex64,
    pub b: Complex64,
    pub b_prime: Complex64,
    pub c: Complex64,
    pub c_prime: Complex64,
    pub xi: f64,
    pub sign: Branch,
}

impl EigenCoefficients {
    /// Transmitted flux fraction `|T|²` where `T` is the transmission
    /// coefficient of this branch.
    pub fn transmitted(&self) -> f64 {
        match self.sign {
            Branch::Plus => self.c.norm_sqr(),
            Branch::Minus => self.a.norm_sqr(),
        }
    }

    /// Reflected flux fraction `|R|²`.
    pub fn reflected(&self) -> f64 {
        match self.sign {
            Branch::Plus => self.a_prime.norm_sqr(),
            Branch::Minus => self.c_prime.norm_sqr(),
        }
    }

    /// `|T|² + |R|² - 1`, which vanishes identically for the exact
    /// coefficients.
    pub fn flux_residual(&self) -> f64 {
        (self.transmitted() + self.reflected() - 1.0).abs()
    }
}

/// `sinh(z)/z`, by a 6-term even Taylor polynomial for small `|z|` where
/// the direct quotient would divide a subnormal-accurate numerator by a
/// tiny denominator (and 0/0 exactly at the branch point).
pub(crate) fn sinhc(z: Complex64) -> Complex64 {
    if z.norm_sqr() < 1e-6 {
        let z2 = z * z;
        // 1 + z²/3! + z⁴/5! + ... + z¹⁰/11!
        let mut acc = Complex64::new(1.0 / 39_916_800.0, 0.0);
        for c in [362_880.0, 5040.0, 120.0, 6.0, 1.0] {
            acc = acc * z2 + 1.0 / c;
        }
        acc
    } else {
        z.sinh() / z
    }
}

/// Exact scattering coefficients at frequency `xi != 0`.
pub fn coefficients(xi: f64, pot: &BarrierPotential) -> Result<EigenCoefficients> {
    let sign = Branch::of(xi)?;
    if pot.is_free() {
        // Plane waves: e(x, xi) = e^{i xi x} in every region. In the
        // middle region the rho-basis degenerates to e^{±i|xi|x}, so the
        // minus branch puts the whole wave on the b' mode.
        let (b, b_prime) = match sign {
            Branch::Plus => (ONE, ZERO),
            Branch::Minus => (ZERO, ONE),
        };
        return Ok(EigenCoefficients {
            a: ONE,
            a_prime: ZERO,
            b,
            b_prime,
            c: ONE,
            c_prime: ZERO,
            xi,
            sign,
        });
    }

    let eps = pot.epsilon();
    let r = rho(xi, pot).value;
    let cosh2r = (2.0 * r).cosh();
    let sinhc2r = sinhc(2.0 * r);
    // denominator 2·rho·xi·cosh(2rho) ± i(rho² - xi²)·sinh(2rho), with the
    // overall factor 2·rho cancelled against the numerators
    let r2_minus_xi2 = r * r - xi * xi;
    Ok(match sign {
        Branch::Plus => {
            let denom = xi * cosh2r + I * r2_minus_xi2 * sinhc2r;
            let phase = (-2.0 * I * xi).exp();
            let c = xi * phase / denom;
            let a_prime = -I * eps * eps * sinhc2r * phase / denom;
            let b = c / (2.0 * r) * (r + I * xi) * (-r + I * xi).exp();
            let b_prime = c / (2.0 * r) * (r - I * xi) * (r + I * xi).exp();
            EigenCoefficients {
                a: ONE,
                a_prime,
                b,
                b_prime,
                c,
                c_prime: ZERO,
                xi,
                sign,
            }
        }
        Branch::Minus => {
            let denom = xi * cosh2r - I * r2_minus_xi2 * sinhc2r;
            let phase = (2.0 * I * xi).exp();
            let a = xi * phase / denom;
            let c_prime = I * eps * eps * sinhc2r * phase / denom;
            let b = a / (2.0 * r) * (r + I * xi) * (r - I * xi).exp();
            let b_prime = a / (2.0 * r) * (r - I * xi) * (-r - I * xi).exp();
            EigenCoefficients {
                a,
                a_prime: ZERO,
                b,
                b_prime,
                c: ONE,
                c_prime,
                xi,
                sign,
            }
        }
    })
}

/// A generalized eigenfunction frozen at one frequency, caching the
/// scattering data so repeated spatial evaluation (the hot path of kernel
/// quadrature) costs two complex exponentials.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    xi: f64,
    free: bool,
    rho: Complex64,
    coeff: EigenCoefficients,
}

impl Eigenfunction {
    pub fn new(pot: &BarrierPotential, xi: f64) -> Result<Self> {
        Ok(Self {
            xi,
            free: pot.is_free(),
            rho: rho(xi, pot).value,
            coeff: coefficients(xi, pot)?,
        })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn coefficients(&self) -> &EigenCoefficients {
        &self.coeff
    }

    /// `e(x, xi)`.
    pub fn eval(&self, x: f64) -> Complex64 {
        let xi = self.xi;
        if self.free {
            return (I * xi * x).exp();
        }
        match self.coeff.sign {
            Branch::Plus => {
                if x < -1.0 {
                    (I * xi * x).exp() + self.coeff.a_prime * (-I * xi * x).exp()
                } else if x > 1.0 {
                    self.coeff.c * (I * xi * x).exp()
                } else {
                    // b e^{rho x} + b' e^{-rho x} in the numerically stable
                    // form c·e^{i xi}[cosh(rho u) - i·xi·u·sinhc(rho u)], u = 1-x
                    let u = 1.0 - x;
                    let z = self.rho * u;
                    self.coeff.c * (I * xi).exp() * (z.cosh() - I * xi * u * sinhc(z))
                }
            }
            Branch::Minus => {
                if x > 1.0 {
                    (I * xi * x).exp() + self.coeff.c_prime * (-I * xi * x).exp()
                } else if x < -1.0 {
                    self.coeff.a * (I * xi * x).exp()
                } else {
                    let u = 1.0 + x;
                    let z = self.rho * u;
                    self.coeff.a * (-I * xi).exp() * (z.cosh() + I * xi * u * sinhc(z))
                }
            }
        }
    }

    /// `∂e/∂x (x, xi)`.
    pub fn eval_dx(&self, x: f64) -> Complex64 {
        let xi = self.xi;
        if self.free {
            return I * xi * (I * xi * x).exp();
        }
        match self.coeff.sign {
            Branch::Plus => {
                if x < -1.0 {
                    I * xi * ((I * xi * x).exp() - self.coeff.a_prime * (-I * xi * x).exp())
                } else if x > 1.0 {
                    I * xi * self.coeff.c * (I * xi * x).exp()
                } else {
                    // d/dx of the stable middle form:
                    // c·e^{i xi}[-rho²·u·sinhc(rho u) + i·xi·cosh(rho u)]
                    let u = 1.0 - x;
                    let z = self.rho * u;
                    self.coeff.c
                        * (I * xi).exp()
                        * (-self.rho * self.rho * u * sinhc(z) + I * xi * z.cosh())
                }
            }
            Branch::Minus => {
                if x > 1.0 {
                    I * xi * ((I * xi * x).exp() - self.coeff.c_prime * (-I * xi * x).exp())
                } else if x < -1.0 {
                    I * xi * self.coeff.a * (I * xi * x).exp()
                } else {
                    let u = 1.0 + x;
                    let z = self.rho * u;
                    self.coeff.a
                        * (-I * xi).exp()
                        * (self.rho * self.rho * u * sinhc(z) + I * xi * z.cosh())
                }
            }
        }
    }
}

/// `e(x, xi)` as a one-shot call; building an [`Eigenfunction`] is cheaper
/// when many `x` share one `xi`.
pub fn eval_eigenfunction(x: f64, xi: f64, pot: &BarrierPotential) -> Result<Complex64> {
    Ok(Eigenfunction::new(pot, xi)?.eval(x))
}

/// `∂e/∂x (x, xi)`.
pub fn eval_eigenfunction_dx(x: f64, xi: f64, pot: &BarrierPotential) -> Result<Complex64> {
    Ok(Eigenfunction::new(pot, xi)?.eval_dx(x))
}

/// `|-e'' + V e - xi² e|` with `e''` from a 5-point central stencil of
/// step `h`. Requires `x` at least `10 h` away from the barrier edges so
/// the stencil never straddles the jump of `V`.
pub fn eigen_residual(x: f64, xi: f64, pot: &BarrierPotential, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "stencil step must be positive, got {h}"
        )));
    }
    let delta = 10.0 * h;
    if (x - 1.0).abs() < delta || (x + 1.0).abs() < delta {
        return Err(Error::StencilAtInterface { x, delta });
    }
    let ef = Eigenfunction::new(pot, xi)?;
    let f = |t: f64| ef.eval(t);
    let second = (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h)
        - f(x + 2.0 * h))
        / (12.0 * h * h);
    Ok((-second + (pot.value(x) - xi * xi) * f(x)).norm())
}
