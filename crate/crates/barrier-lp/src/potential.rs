//! The square-barrier potential and its derived scales.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The potential `V = eps^2 · chi_[-1,1]`: a bump of height `eps^2` on the
/// interval `[-1, 1]`, parameterized by `eps > 0`.
///
/// `eps = 0` (the free particle) is representable through [`BarrierPotential::free`]
/// and short-circuits every eigenfunction formula to plane waves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarrierPotential {
    epsilon: f64,
}

impl BarrierPotential {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !epsilon.is_finite() || epsilon <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "barrier parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    /// The free particle, `V = 0`.
    pub fn free() -> Self {
        Self { epsilon: 0.0 }
    }

    pub fn is_free(&self) -> bool {
        self.epsilon == 0.0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Barrier height `eps^2`.
    pub fn height(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    /// `V(x)`.
    pub fn value(&self, x: f64) -> f64 {
        if x.abs() <= 1.0 {
            self.height()
        } else {
            0.0
        }
    }

    /// Threshold band index `J = 4 + floor(2 log2 eps)` separating the
    /// high-energy kernel regime (`j > J`) from the low-energy one
    /// (`j <= J`). Always recomputed from `eps`; `None` for the free
    /// particle, for which every band is high-energy.
    pub fn j_threshold(&self) -> Option<i32> {
        if self.is_free() {
            None
        } else {
            Some(4 + (2.0 * self.epsilon.log2()).floor() as i32)
        }
    }

    /// True when band `j` lies in the high-energy regime.
    pub fn is_high_energy(&self, j: i32) -> bool {
        match self.j_threshold() {
            Some(threshold) => j > threshold,
            None => true,
        }
    }
}
