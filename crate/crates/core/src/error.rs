//! Error types shared across the crate.

use thiserror::Error;

use crate::minnorm::MinNormSolution;
use crate::polytope::WindowViolation;

/// Errors produced by signal construction, linear algebra, the solver stages,
/// and the brute-force oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Cyclic signals must have odd length so the window half-width is integral.
    #[error("signal length must be odd: got {0}")]
    EvenLength(usize),

    /// Signals shorter than 3 samples admit no tapered window.
    #[error("signal length must be at least 3: got {0}")]
    TooShort(usize),

    /// A sample was NaN or infinite.
    #[error("sample at index {index} is not finite: {value}")]
    NonFiniteSample { index: usize, value: f64 },

    /// A vector argument had the wrong length for the operation.
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// Weight or mixture entries must sum to one.
    #[error("entries must sum to 1 within {tol:e}: sum is {sum}")]
    NotNormalized { sum: f64, tol: f64 },

    /// Weight or mixture entries may not dip below the sign tolerance.
    #[error("entry at index {index} is negative: {value}")]
    NegativeEntry { index: usize, value: f64 },

    /// A window failed structural validation.
    #[error("invalid window: {0}")]
    InvalidWindow(#[from] WindowViolation),

    /// Vertex indices run from 1 to the polytope order.
    #[error("vertex index must satisfy 1 <= i <= {order}: got {index}")]
    VertexIndexOutOfRange { index: usize, order: usize },

    /// The polytope order (effective half-width) is out of range.
    #[error("window order must satisfy 1 <= m <= {max}: got {order}")]
    InvalidOrder { order: usize, max: usize },

    /// A tolerance or iteration budget was not positive.
    #[error("{name} must be positive: got {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    /// A matrix expected to be positive semi-definite had a significantly
    /// negative eigenvalue.
    #[error("matrix is not positive semi-definite: eigenvalue {eigenvalue:e} below -{tol:e} * {scale:e}")]
    NotPsd { eigenvalue: f64, tol: f64, scale: f64 },

    /// The Jacobi eigensolver failed to reduce the off-diagonal mass.
    #[error("eigendecomposition did not converge within {sweeps} sweeps")]
    EigNonConvergence { sweeps: usize },

    /// The affine minimum-norm subproblem needs at least one point.
    #[error("affine subproblem requires a non-empty subset")]
    EmptyActiveSet,

    /// The affine subproblem solution drifted off the sum-to-one hyperplane,
    /// which indicates a numerically inconsistent active set.
    #[error("affine subproblem lost the sum constraint: coefficients sum to {sum}")]
    AffineSumDrift { sum: f64 },

    /// The minimum-norm projection ran out of iterations (or stalled) before
    /// its optimality certificate held. The best iterate found is attached.
    #[error("minimum-norm projection did not converge within {iterations} iterations (certificate gap {gap:e})")]
    MinNormFailure {
        iterations: usize,
        gap: f64,
        best: Box<MinNormSolution>,
    },

    /// The equality-constrained stage divided by a vanishing curvature term.
    #[error("equality-constrained stage is degenerate: e'Q^+e = {denominator:e}")]
    DegenerateEquality { denominator: f64 },

    /// Closed-form stages were requested exclusively but neither produced a
    /// feasible mixture. The best (infeasible) candidate is attached.
    #[error("closed-form stages produced no feasible mixture")]
    ClosedFormInfeasible { best: Box<BestIterate> },

    /// The projection stage failed to converge. The best iterate is attached
    /// so callers can still report it.
    #[error("solver did not converge within {iterations} iterations (certificate gap {gap:e})")]
    SolverFailure {
        iterations: usize,
        gap: f64,
        best: Box<BestIterate>,
    },

    /// The dense grid oracle refused a search that would enumerate too many
    /// mixtures.
    #[error("grid search would enumerate about {estimate:.3e} mixtures, above the limit {limit:.3e}")]
    GridTooLarge { estimate: f64, limit: f64 },

    /// The face-enumeration oracle visits all 2^m - 1 supports and is capped.
    #[error("face enumeration supports order <= {max}: got {order}")]
    TooManyFaces { order: usize, max: usize },
}

/// A possibly infeasible solver iterate attached to failure reports so that
/// diagnostics can still show where the solver stopped.
///
/// `loss` here is the quadratic-form objective value of the iterate; it is
/// only recomputed from the smoothed signal on success paths, where the
/// mixture is guaranteed to be feasible.
#[derive(Debug, Clone)]
pub struct BestIterate {
    pub mixture: Vec<f64>,
    pub weights: Vec<f64>,
    pub loss: f64,
    pub stage: crate::qp::Stage,
    pub iterations: usize,
    pub degenerate: bool,
}

/// Convenient result alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;
