//! Band-structure physics of the three-beam honeycomb optical lattice.
//!
//! The crate covers, at desk scale, the full chain from laser parameters to
//! observables: lattice geometry and the dimensionless optical potential
//! (including strength, angle and phase distortions), the closed-form
//! tight-binding spectrum with its Dirac-point analysis, exact Bloch bands by
//! truncated plane-wave diagonalization, semiclassical (instanton) and
//! harmonic estimates of the hopping amplitude, and bisection sweeps for the
//! critical lattice distortions.
//!
//! Internal units: `k_L = 1`, `E_R = 1`, `hbar = 1` (so the atomic mass is
//! `1/2`). The core math is generic over the floating-point scalar through
//! [`scalar::Real`]; the aliases below fix `f64`, which is what the CLI and
//! the quantitative test suites use.

pub mod eigen;
pub mod error;
pub mod geometry;
pub mod planewave;
pub mod potential;
pub mod scalar;
pub mod semiclassics;
pub mod tightbinding;
pub mod vec2;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision aliases for the common types.
pub type Vec2f = vec2::Vec2<f64>;
pub type BeamConfig64 = geometry::BeamConfig<f64>;
pub type LatticeVectors64 = geometry::LatticeVectors<f64>;
pub type CriticalPoint64 = potential::CriticalPoint<f64>;
pub type Potential64 = potential::Potential<f64>;
pub type HoppingSet64 = tightbinding::HoppingSet<f64>;
pub type DiracPair64 = tightbinding::DiracPair<f64>;
pub type BandGrid64 = planewave::BandGrid<f64>;
pub type BlochSolver64 = planewave::BlochSolver<f64>;
pub type InstantonResult64 = semiclassics::InstantonResult<f64>;
