//! Optimal tapered windows for cyclic weighted moving-average smoothing.
//!
//! Given one period of a cyclic signal, this crate finds the weight window
//! that minimises the cumulative squared smoothing error over the class of
//! symmetric, outward-tapering, zero-centre windows. That class is a convex
//! polytope with a tiny vertex description, so the search reduces to a
//! quadratic program over the unit simplex — solved in closed form when its
//! stationary points are feasible, and otherwise as a projection of the
//! origin onto a convex hull of points built from the signal's
//! autocorrelation.
//!
//! ```
//! use taperwin::{solve, Signal, SolveOptions};
//!
//! let signal = Signal::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
//! let report = solve(&signal, 2, &SolveOptions::default()).unwrap();
//! assert!((report.loss - 12.5).abs() < 1e-8);
//! for (w, expected) in report.window.weights().iter().zip([0.0, 0.5, 0.0, 0.5, 0.0]) {
//!     assert!((w - expected).abs() < 1e-9);
//! }
//! ```
//!
//! Modules:
//! - [`signal`]: cyclic signals, autocorrelation, window application, loss.
//! - [`polytope`]: the window class, its vertices, mixtures of them.
//! - [`numerics`]: dense symmetric eigendecomposition and PSD solves.
//! - [`qp`]: the reduced quadratic program and the staged solver.
//! - [`minnorm`]: minimum-norm point in a convex hull (Wolfe's method).
//! - [`oracle`]: brute-force reference solvers for verification.
//! - [`cli`]: the command-line front end used by the `taperwin` binary.

pub mod cli;
pub mod error;
pub mod minnorm;
pub mod numerics;
pub mod oracle;
pub mod polytope;
pub mod qp;
pub mod signal;

pub use error::{BestIterate, Error};
pub use minnorm::{affine_min_norm, min_norm_point, MinNormSolution, PolytopePoints};
pub use numerics::{eig_sym, solve_psd, sqrt_psd, SymmetricEig, SymmetricMatrix};
pub use oracle::{face_enumeration, grid_search, FaceResult, GridResult, GridSpec};
pub use polytope::{
    identity_window, mixture_from_window, validate_window, vertex, window_from_mixture, Mixture,
    VertexMatrix, Window, WindowViolation,
};
pub use qp::{
    build_qp, equality_minimizer, in_simplex, solve, unconstrained_minimizer, EqualitySolution,
    ReducedQP, Route, SolveOptions, SolveReport, Stage,
};
pub use signal::{AutocorrStats, ShiftMatrix, Signal};
