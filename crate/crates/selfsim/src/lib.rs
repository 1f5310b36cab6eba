//! Finite-energy self-similar blow-up profiles for the slightly mass-supercritical
//! nonlinear Schrödinger equation, computed by matching an interior expansion
//! around the ground state to an exterior solution integrated through the
//! turning point.

pub mod airy;
pub mod diagnostics;
pub mod error;
pub mod exterior;
pub mod farfield;
pub mod ground_state;
pub mod interior;
pub mod matcher;
pub mod ode;
pub mod quad;

pub use error::{Error, Result};
