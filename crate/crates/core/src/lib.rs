//! Numerical laboratory for planar Gross-Pitaevskii vortex dynamics.
//!
//! The crate builds the full chain from the degree-one Ginzburg-Landau vortex
//! profile to radiation-corrected point-vortex motion:
//!
//! * [`profile`] — the degree-one vortex modulus `w(r)` as a boundary-value
//!   problem, with derivative evaluation everywhere,
//! * [`vortex`] — the Helmholtz-Kirchhoff point-vortex system, its Hamiltonian
//!   and conserved-quantity diagnostics,
//! * [`ansatz`] — the multi-vortex product field, its residual under the
//!   rescaled equation and the angular mode structure of the first error,
//! * [`modes`] — mode-by-mode inversion of the linearized vortex operator and
//!   the first inner correction,
//! * [`wave`] — the 2D inhomogeneous wave equation through the Duhamel
//!   formula, with growth, decay and energy diagnostics,
//! * [`radiation`] — the outer radiation forcing, its wave solution and the
//!   corrected vortex motion laws,
//! * [`gpe`] — a split-step spectral Gross-Pitaevskii solver on a periodic
//!   torus used as an independent oracle for vortex trajectories,
//! * [`acceptance`] — the end-to-end verification suite.

pub mod acceptance;
pub mod ansatz;
pub mod error;
pub mod gpe;
pub mod io;
pub mod modes;
pub mod numerics;
pub mod profile;
pub mod radiation;
pub mod vortex;
pub mod wave;

pub use error::{Error, Result};
pub use numerics::Vec2;
