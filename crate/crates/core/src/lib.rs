//! Weak-coupling limit generators ("quantum Fokker-Planck" equations) for
//! finite-dimensional physical subsystems.
//!
//! The crate is organised bottom-up:
//!
//! * [`mat`]: dense complex linear algebra, superoperators, Choi matrices;
//! * [`subsystem`]: Kraus-form conditional expectations and their checks;
//! * [`coarse_grain`]: Gaussian coarse-grained perturbations, the coupling
//!   schedule and the principal-value frequency integrals;
//! * [`generator`]: assembly of the Lindblad-form generator, the
//!   time-domain reference evaluation, propagation and certificates;
//! * [`scenarios`]: sector dynamics, heat-bath dynamics and sweeps.

pub mod coarse_grain;
pub mod error;
pub mod generator;
pub mod mat;
pub mod quad;
pub mod scenarios;
pub mod subsystem;

pub use error::{Error, Result};
