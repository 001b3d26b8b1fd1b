use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The generalized eigenfunctions jump at the spectral origin, so no
    /// value is defined there. Integrals over xi must split at 0.
    #[error("eigenfunction is undefined at xi = 0; split integrals at the origin")]
    ZeroFrequency,

    #[error("x = {x} is within {delta} of a barrier edge; the stencil would straddle the jump in V")]
    StencilAtInterface { x: f64, delta: f64 },

    #[error("dyadic construction for family {family} realizes lower bound {c:.3e} < 1e-8 on a mandated set")]
    DyadicConstruction { c: f64, family: String },

    #[error("spectral grid under-resolves the integrand: {0}")]
    Resolution(String),

    #[error("grid domain error: {0}")]
    GridDomain(String),
}
