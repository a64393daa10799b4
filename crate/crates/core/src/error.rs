//! Error type shared by all lattice computations.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A beam configuration violated a precondition (non-positive strength,
    /// non-positive depth, zero detuning, out-of-range cutoff, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The rotated beams became (nearly) collinear and no longer span a
    /// two-dimensional reciprocal cell.
    #[error("degenerate cell: |b1 x b2| = {cross_norm} k_L^2 is below {min} k_L^2")]
    DegenerateCell { cross_norm: f64, min: f64 },

    /// Zero laser detuning; the dipole potential diverges.
    #[error("zero detuning: dipole potential undefined")]
    ZeroDetuning,

    /// The field strengths (or hopping magnitudes) violate every triangle
    /// inequality, so the two-point basis is lost.
    #[error("triangle inequality violated: ({0}, {1}, {2}) admits no two-minima structure")]
    TriangleInequalityViolated(f64, f64, f64),

    /// The field amplitude is only defined for the coherent (phi = 0) lattice.
    #[error("phase variant (phi = {0}) is an incoherent superposition with no single field amplitude")]
    PhaseVariant(f64),

    /// A point failed to refine onto a critical point of the potential.
    #[error("not a critical point: gradient norm {grad_norm} after refinement at ({x}, {y})")]
    NotCritical { x: f64, y: f64, grad_norm: f64 },

    /// Dirac-point analysis requires a vanishing on-site imbalance.
    #[error("nonzero mass: on-site imbalance epsilon = {0} gaps the spectrum")]
    NonzeroMass(f64),

    /// The LAPACK eigensolver reported a failure.
    #[error("eigensolver failure at k = ({kx}, {ky}): {detail}")]
    EigensolverFailure { kx: f64, ky: f64, detail: String },

    /// The bisection predicate is not monotone across the initial bracket.
    #[error("bracketing failure: {0}")]
    BracketingFailure(String),

    /// An iterative limit failed to converge; carries the remaining drift.
    #[error("non-convergence: {what} (drift {drift})")]
    NonConvergence { what: String, drift: f64 },

    /// The least-squares system is rank deficient.
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),
}

pub type Result<T> = std::result::Result<T, Error>;
