//! The reduced quadratic program over vertex mixtures and its staged solver.
//!
//! Writing a candidate window as a mixture `w = V p` of the polytope vertices
//! (columns of `V`, see [`crate::polytope`]) turns the smoothing loss into a
//! quadratic in the mixture coefficients:
//!
//! ```text
//! L(V p) = r0 - 2 b'p + p'Q p,      b = V'r,   Q = V'RV,
//! ```
//!
//! to be minimised over the unit simplex. With the complement columns
//! `V~ = v0 1' - V` (identity window minus each vertex) the same objective
//! collapses, on the sum-to-one hyperplane, to a single positive
//! semi-definite form
//!
//! ```text
//! L(V p) = p' Q~ p,                 Q~ = V~' R V~,
//! ```
//!
//! because `Q~ = r0 11' - 1 b' - b 1' + Q` entry for entry. This makes the
//! simplex-constrained problem a projection of the origin: factoring
//! `Q~ = A A` with the symmetric PSD square root, `p' Q~ p = |A p|^2`, so the
//! optimal mixture is the minimum-norm point of the convex hull of the
//! columns of `A` ([`crate::minnorm`]).
//!
//! The solver runs a fixed cascade, cheapest first:
//!
//! 1. **unconstrained**: `p = Q^+ b`; accepted if it already lies on the
//!    simplex (then no constraint binds).
//! 2. **equality**: the sum-to-one stationary point
//!    `p = Q^+ b + lambda Q^+ 1` with `lambda = (1 - 1'Q^+ b) / (1'Q^+ 1)`;
//!    accepted if non-negative.
//! 3. **projection**: the minimum-norm hull point above, which handles
//!    binding sign constraints.
//!
//! Reported losses are always recomputed by smoothing the signal and summing
//! squared residuals ([`crate::signal::Signal::loss_direct`]), never read off
//! the quadratic algebra.

use crate::error::{BestIterate, Error, Result};
use crate::minnorm::{min_norm_point, PolytopePoints};
use crate::numerics::{dot, eig_sym, solve_psd, sqrt_psd, SymmetricMatrix, DEFAULT_RANK_TOL};
use crate::polytope::{window_from_mixture, Mixture, VertexMatrix, Window};
use crate::signal::Signal;

/// Relative spectral threshold below which the reduced objective is treated
/// as identically zero: every mixture is then optimal and the solver returns
/// the uniform one.
pub const DEGENERATE_SCALE_TOL: f64 = 1e-12;

/// Default simplex feasibility tolerance used by the cascade.
pub const DEFAULT_FEAS_TOL: f64 = 1e-9;

/// The reduced quadratic program for one signal and window order.
#[derive(Debug, Clone)]
pub struct ReducedQP {
    vertices: VertexMatrix,
    q: SymmetricMatrix,
    b: Vec<f64>,
    q_tilde: SymmetricMatrix,
    r0: f64,
    signal_len: usize,
}

impl ReducedQP {
    /// Number of vertices / mixture coefficients.
    pub fn order(&self) -> usize {
        self.vertices.order()
    }

    pub fn signal_len(&self) -> usize {
        self.signal_len
    }

    pub fn vertices(&self) -> &VertexMatrix {
        &self.vertices
    }

    /// `Q = V'RV`.
    pub fn q(&self) -> &SymmetricMatrix {
        &self.q
    }

    /// `b = V'r`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `Q~ = V~'RV~`.
    pub fn q_tilde(&self) -> &SymmetricMatrix {
        &self.q_tilde
    }

    /// Zero-lag autocorrelation `r0`, the loss scale.
    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// The loss `r0 - 2 b'p + p'Qp` of an arbitrary coefficient vector; equal
    /// to the smoothing loss of `Vp` whether or not `p` is feasible.
    pub fn objective(&self, p: &[f64]) -> Result<f64> {
        let quad = self.q.quadratic_form(p)?;
        Ok(self.r0 - 2.0 * dot(&self.b, p) + quad)
    }

    /// The complement form `p'Q~p`; equals [`Self::objective`] whenever the
    /// coefficients sum to one.
    pub fn complement_objective(&self, p: &[f64]) -> Result<f64> {
        self.q_tilde.quadratic_form(p)
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        vertices: VertexMatrix,
        q: SymmetricMatrix,
        b: Vec<f64>,
        q_tilde: SymmetricMatrix,
        r0: f64,
        signal_len: usize,
    ) -> Self {
        Self {
            vertices,
            q,
            b,
            q_tilde,
            r0,
            signal_len,
        }
    }
}

/// Builds the reduced program for a signal and a window order
/// `1 <= order <= K`. Orders below `K` embed the vertices in full-length
/// windows with zero outer weights.
pub fn build_qp(signal: &Signal, order: usize) -> Result<ReducedQP> {
    let k = signal.half_width();
    if order < 1 || order > k {
        return Err(Error::InvalidOrder { order, max: k });
    }
    let stats = signal.autocorr_stats();
    let vertices = VertexMatrix::embedded(order, k)?;
    let r_matrix = stats.matrix();

    let r_cols: Vec<Vec<f64>> = (1..=order)
        .map(|j| r_matrix.mul_vec(vertices.column(j)))
        .collect::<Result<_>>()?;
    let q = SymmetricMatrix::from_fn(order, |i, j| dot(vertices.column(i + 1), &r_cols[j]));
    let b: Vec<f64> = (1..=order)
        .map(|i| dot(vertices.column(i), stats.lag_vector()))
        .collect();

    let r_comp_cols: Vec<Vec<f64>> = (1..=order)
        .map(|j| r_matrix.mul_vec(vertices.complement_column(j)))
        .collect::<Result<_>>()?;
    let q_tilde = SymmetricMatrix::from_fn(order, |i, j| {
        dot(vertices.complement_column(i + 1), &r_comp_cols[j])
    });

    Ok(ReducedQP {
        vertices,
        q,
        b,
        q_tilde,
        r0: stats.r0(),
        signal_len: signal.len(),
    })
}

/// The unconstrained stationary point `Q^+ b` under the crate's pseudo-inverse
/// convention. Feasible or not, this is the cheapest candidate.
pub fn unconstrained_minimizer(qp: &ReducedQP) -> Result<Vec<f64>> {
    solve_psd(&qp.q, &qp.b, DEFAULT_RANK_TOL)
}

/// The sum-to-one stationary point together with its Lagrange multiplier.
#[derive(Debug, Clone)]
pub struct EqualitySolution {
    pub coefficients: Vec<f64>,
    pub multiplier: f64,
}

/// The minimiser of the objective restricted to the sum-to-one hyperplane:
/// `p = Q^+ b + lambda Q^+ 1`, `lambda = (1 - 1'Q^+ b) / (1'Q^+ 1)`.
///
/// Errors with [`Error::DegenerateEquality`] when the curvature along the
/// feasible direction vanishes (`1'Q^+ 1` at the scale of rounding noise),
/// in which case the multiplier is meaningless.
pub fn equality_minimizer(qp: &ReducedQP) -> Result<EqualitySolution> {
    equality_minimizer_with(qp, DEFAULT_RANK_TOL)
}

fn equality_minimizer_with(qp: &ReducedQP, rank_tol: f64) -> Result<EqualitySolution> {
    let p_q = solve_psd(&qp.q, &qp.b, rank_tol)?;
    let q_inv_ones = solve_psd(&qp.q, &vec![1.0; qp.order()], rank_tol)?;
    let denominator: f64 = q_inv_ones.iter().sum();
    if denominator.abs() <= 1e-14 / (1.0 + qp.r0) {
        return Err(Error::DegenerateEquality { denominator });
    }
    let multiplier = (1.0 - p_q.iter().sum::<f64>()) / denominator;
    let coefficients = p_q
        .iter()
        .zip(&q_inv_ones)
        .map(|(p, e)| p + multiplier * e)
        .collect();
    Ok(EqualitySolution {
        coefficients,
        multiplier,
    })
}

/// Membership of the unit simplex within an absolute tolerance on both the
/// entry signs and the sum.
pub fn in_simplex(p: &[f64], tol: f64) -> bool {
    p.iter().all(|&v| v >= -tol) && (p.iter().sum::<f64>() - 1.0).abs() <= tol
}

/// Which stage of the cascade produced the reported mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Unconstrained,
    Equality,
    Projection,
    GridFallback,
}

impl Stage {
    /// Stable lowercase name used in reports.
    pub fn name(self) -> &'static str {
        match self {
            Stage::Unconstrained => "unconstrained",
            Stage::Equality => "equality",
            Stage::Projection => "projection",
            Stage::GridFallback => "grid",
        }
    }
}

/// Which stages the solver may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Route {
    /// Full cascade: closed forms first, projection as needed.
    #[default]
    Auto,
    /// Closed forms only; errors if neither stationary point is feasible.
    ClosedOnly,
    /// Straight to the projection stage.
    Projection,
}

/// Solver knobs. The defaults match the documented tolerances; see each
/// field.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub route: Route,
    /// Simplex feasibility tolerance for accepting closed-form candidates
    /// and canonicalising mixtures.
    pub feas_tol: f64,
    /// Relative eigenvalue clip for pseudo-inverses and the PSD square root.
    pub rank_tol: f64,
    /// Convergence tolerance of the projection stage's certificate.
    pub minnorm_tol: f64,
    /// Major-cycle budget of the projection stage.
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            route: Route::Auto,
            feas_tol: DEFAULT_FEAS_TOL,
            rank_tol: DEFAULT_RANK_TOL,
            minnorm_tol: 1e-10,
            max_iter: 10_000,
        }
    }
}

/// A solved instance: the optimal mixture and window plus how they were
/// found. `loss` is always the directly recomputed smoothing loss.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub mixture: Mixture,
    pub window: Window,
    pub loss: f64,
    pub stage: Stage,
    /// Major cycles of the projection stage; zero for closed-form results.
    pub iterations: usize,
    /// Whether the reduced objective was rank-deficient, i.e. the optimal
    /// mixture is not unique.
    pub degenerate: bool,
    pub signal_len: usize,
    pub order: usize,
}

/// Solves one instance end to end: builds the reduced program, runs the
/// cascade selected by `options.route`, canonicalises the winning mixture
/// onto the simplex, and recomputes its loss directly.
pub fn solve(signal: &Signal, order: usize, options: &SolveOptions) -> Result<SolveReport> {
    validate_options(options)?;
    let qp = build_qp(signal, order)?;

    // Spectral look at the reduced objective: detect both full degeneracy
    // (everything optimal) and rank deficiency (optimum not unique).
    let spectrum = eig_sym(&qp.q_tilde)?;
    let lambda_max = spectrum.values.first().copied().unwrap_or(0.0).max(0.0);
    let scale = 1.0 + qp.r0;
    let rank = spectrum
        .values
        .iter()
        .filter(|&&v| v > options.rank_tol * lambda_max)
        .count();
    let degenerate = rank < qp.order();

    if lambda_max <= DEGENERATE_SCALE_TOL * scale {
        // The objective cannot distinguish mixtures; return the canonical
        // uniform one. The stationary-point formula degenerates to the same
        // answer, hence the stage label.
        let mixture = Mixture::uniform(qp.order());
        return finish(signal, &qp, mixture.into_vec(), Stage::Unconstrained, 0, true, options);
    }

    if options.route != Route::Projection {
        let p_unconstrained = solve_psd(&qp.q, &qp.b, options.rank_tol)?;
        if in_simplex(&p_unconstrained, options.feas_tol) {
            return finish(
                signal,
                &qp,
                p_unconstrained,
                Stage::Unconstrained,
                0,
                degenerate,
                options,
            );
        }
        let equality = equality_minimizer_with(&qp, options.rank_tol);
        if let Ok(eq) = &equality {
            if in_simplex(&eq.coefficients, options.feas_tol) {
                return finish(
                    signal,
                    &qp,
                    eq.coefficients.clone(),
                    Stage::Equality,
                    0,
                    degenerate,
                    options,
                );
            }
        }
        if options.route == Route::ClosedOnly {
            let (stage, candidate) = match equality {
                Ok(eq) => (Stage::Equality, eq.coefficients),
                Err(_) => (Stage::Unconstrained, p_unconstrained),
            };
            let best = best_iterate(&qp, candidate, stage, 0, degenerate)?;
            return Err(Error::ClosedFormInfeasible { best: Box::new(best) });
        }
    }

    project(signal, &qp, degenerate, options)
}

fn validate_options(options: &SolveOptions) -> Result<()> {
    for (name, value) in [
        ("feas_tol", options.feas_tol),
        ("rank_tol", options.rank_tol),
        ("minnorm_tol", options.minnorm_tol),
    ] {
        if !(value > 0.0) {
            return Err(Error::InvalidParameter { name, value });
        }
    }
    if options.max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            value: 0.0,
        });
    }
    Ok(())
}

/// The projection stage: factor `Q~ = A A` and take the minimum-norm point
/// of the hull of the columns of `A`; its hull coefficients are the optimal
/// mixture.
fn project(
    signal: &Signal,
    qp: &ReducedQP,
    degenerate: bool,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let a = sqrt_psd(&qp.q_tilde, options.rank_tol)?;
    let order = qp.order();
    let columns: Vec<Vec<f64>> = (0..order)
        .map(|j| (0..order).map(|i| a.get(i, j)).collect())
        .collect();
    let points = PolytopePoints::new(columns)?;
    match min_norm_point(&points, options.minnorm_tol, options.max_iter) {
        Ok(solution) => finish(
            signal,
            qp,
            solution.coefficients,
            Stage::Projection,
            solution.iterations,
            degenerate,
            options,
        ),
        Err(Error::MinNormFailure {
            iterations,
            gap,
            best,
        }) => {
            let iterate =
                best_iterate(qp, best.coefficients, Stage::Projection, iterations, degenerate)?;
            Err(Error::SolverFailure {
                iterations,
                gap,
                best: Box::new(iterate),
            })
        }
        Err(other) => Err(other),
    }
}

/// Success path: clamp rounding noise off the mixture, rebuild the window,
/// and price it by direct smoothing.
fn finish(
    signal: &Signal,
    qp: &ReducedQP,
    raw: Vec<f64>,
    stage: Stage,
    iterations: usize,
    degenerate: bool,
    options: &SolveOptions,
) -> Result<SolveReport> {
    let mixture = canonicalize(raw, options.feas_tol)?;
    let window = window_from_mixture(&mixture, &qp.vertices)?;
    let loss = signal.loss_direct(window.weights())?;
    Ok(SolveReport {
        mixture,
        window,
        loss,
        stage,
        iterations,
        degenerate,
        signal_len: signal.len(),
        order: qp.order(),
    })
}

/// Snaps a numerically feasible coefficient vector onto the simplex: clamps
/// entries in `[-feas_tol, 0)` to zero and renormalises the sum.
fn canonicalize(mut p: Vec<f64>, feas_tol: f64) -> Result<Mixture> {
    for (index, value) in p.iter_mut().enumerate() {
        if *value < 0.0 {
            if *value < -feas_tol {
                return Err(Error::NegativeEntry {
                    index,
                    value: *value,
                });
            }
            *value = 0.0;
        }
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > feas_tol {
        return Err(Error::NotNormalized {
            sum,
            tol: feas_tol,
        });
    }
    for value in p.iter_mut() {
        *value /= sum;
    }
    Mixture::new(p)
}

fn best_iterate(
    qp: &ReducedQP,
    mixture: Vec<f64>,
    stage: Stage,
    iterations: usize,
    degenerate: bool,
) -> Result<BestIterate> {
    let weights = qp.vertices.combine(&mixture)?;
    let loss = qp.objective(&mixture)?;
    Ok(BestIterate {
        mixture,
        weights,
        loss,
        stage,
        iterations,
        degenerate,
    })
}
