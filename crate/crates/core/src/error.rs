//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("profile solve did not converge: {0}")]
    ProfileNoConvergence(String),

    #[error("vortices too close (min pairwise distance {dist:.3e} < guard {guard:.3e})")]
    Collision { dist: f64, guard: f64 },

    #[error("vortex {index} outside the box (need margin {margin:.3} on side {side:.3})")]
    VortexOutsideBox { index: usize, margin: f64, side: f64 },

    #[error("grid under-resolved: {0}")]
    UnderResolved(String),

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("homogeneous basis construction failed for mode k={k}: {reason}")]
    BasisConstruction { k: usize, reason: String },

    #[error("divergent coefficient integral in mode solve: {0}")]
    DivergentIntegral(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("vortex tracking failed: {0}")]
    Tracking(String),

    #[error("CFL violation: dt {dt:.3e} exceeds bound {bound:.3e}")]
    Cfl { dt: f64, bound: f64 },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
