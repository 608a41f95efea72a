//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
///
/// Variants carry enough context to act on the failure (the offending
/// value, the violated bound) rather than just a message.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A stepsize range or run configuration violates the smoothness
    /// contract (e.g. `alpha_max >= 1/M`) and no override was requested.
    #[error("assumption violation: {0}")]
    AssumptionViolation(String),

    /// A non-finite value surfaced during evaluation or iteration.
    #[error("numerical error: {0}")]
    NumericalError(String),

    /// `classify_critical_point` was called at a point whose gradient
    /// norm exceeds the tolerance.
    #[error("point is not critical: |grad| = {grad_norm:.3e} > tol = {grad_tol:.3e}")]
    NotCritical { grad_norm: f64, grad_tol: f64 },

    /// A matrix expected to be symmetric is not.
    #[error("matrix is not symmetric: max |H_ij - H_ji| = {max_asymmetry:.3e}")]
    NotSymmetric { max_asymmetry: f64 },

    /// A coordinate step matrix cannot be inverted because
    /// `alpha * |H_ii| >= 1`.
    #[error("singular step: alpha * |H_ii| = {value:.6} >= 1 for coordinate {coord}")]
    SingularStep { coord: usize, value: f64 },

    /// The estimated spectrum has no positive exponent, so no unstable
    /// subspace exists to project onto.
    #[error("no unstable direction: every estimated Lyapunov exponent is <= the sign threshold")]
    NoUnstableDirection,

    /// The singular-value gap at the subspace cut is too small to
    /// separate unstable from stable directions.
    #[error("ambiguous subspace: relative singular-value gap {gap:.3e} below 1e-8 at the d_plus cut")]
    AmbiguousSubspace { gap: f64 },

    /// A certificate constant requires `lambda_min(H) < 0`.
    #[error("not a saddle: lambda_min(H) = {min_eig:.6} >= 0")]
    NotASaddle { min_eig: f64 },

    /// The matrix has no nonzero singular value (H = 0), so the decay
    /// constants are undefined.
    #[error("degenerate matrix: no singular value above {tol:.3e}")]
    DegenerateMatrix { tol: f64 },

    /// No block length S <= 10^9 satisfies the certificate inequalities.
    #[error("certificate infeasible: {blocking} not satisfiable for any S <= 1e9")]
    CertificateInfeasible { blocking: String },

    /// A caller-supplied parameter is out of its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
