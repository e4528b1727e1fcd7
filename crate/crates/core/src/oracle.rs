//! Brute-force reference solvers.
//!
//! Two independent oracles cross-check the staged solver on small instances:
//! a dense simplex grid search over mixtures, and exact enumeration of the
//! simplex faces with the stationary point computed on each face. Both are
//! deliberately simple and deterministic; they exist to be trusted, not to be
//! fast.

use crate::error::{Error, Result};
use crate::numerics::{solve_sym_pinv, SymmetricMatrix, DEFAULT_RANK_TOL};
use crate::qp::ReducedQP;
use crate::signal::Signal;

/// Ceiling on the number of grid mixtures the search will enumerate.
pub const GRID_LIMIT: f64 = 1e7;

/// Ceiling on the order accepted by face enumeration (2^order - 1 faces).
pub const MAX_FACE_ORDER: usize = 20;

/// Feasibility tolerance for face candidates.
const FACE_FEAS_TOL: f64 = 1e-9;

/// Relative residual tolerance for accepting a face's stationary point.
const FACE_RESIDUAL_TOL: f64 = 1e-8;

/// Relative tie band inside which an earlier (lexicographically smaller)
/// face keeps the win.
const FACE_TIE_TOL: f64 = 1e-12;

/// Resolution of the simplex grid: coefficients move in steps of
/// `1 / resolution`.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    resolution: usize,
}

impl GridSpec {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::InvalidParameter {
                name: "resolution",
                value: 0.0,
            });
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Number of mixtures the grid enumerates for the given order:
    /// compositions of `resolution` into `order` non-negative parts,
    /// `C(resolution + order - 1, order - 1)`, computed in floating point so
    /// oversized requests can be refused with an estimate.
    pub fn mixture_count(&self, order: usize) -> f64 {
        let r = self.resolution as f64;
        let mut count = 1.0;
        for i in 1..order {
            count *= (r + i as f64) / i as f64;
            if count > 1e18 {
                return f64::INFINITY;
            }
        }
        count
    }
}

/// Outcome of a grid search: the best mixture visited, its directly
/// evaluated loss, and how many mixtures were tried.
#[derive(Debug, Clone)]
pub struct GridResult {
    pub mixture: Vec<f64>,
    pub loss: f64,
    pub evaluations: usize,
}

/// Evaluates the smoothing loss of every mixture on the simplex grid and
/// returns the best. Candidates are enumerated in lexicographic order and
/// only strict improvements replace the incumbent, so ties resolve to the
/// lexicographically smallest mixture.
pub fn grid_search(signal: &Signal, order: usize, grid: &GridSpec) -> Result<GridResult> {
    let k = signal.half_width();
    if order < 1 || order > k {
        return Err(Error::InvalidOrder { order, max: k });
    }
    let estimate = grid.mixture_count(order);
    if estimate > GRID_LIMIT {
        return Err(Error::GridTooLarge {
            estimate,
            limit: GRID_LIMIT,
        });
    }
    let qp = crate::qp::build_qp(signal, order)?;
    let resolution = grid.resolution;

    let mut counts = vec![0usize; order];
    let mut best_loss = f64::INFINITY;
    let mut best: Vec<f64> = Vec::new();
    let mut evaluations = 0usize;
    let mut coefficients = vec![0.0; order];

    enumerate_compositions(0, resolution, &mut counts, &mut |counts| {
        for (c, v) in coefficients.iter_mut().zip(counts) {
            *c = *v as f64 / resolution as f64;
        }
        let weights = qp
            .vertices()
            .combine(&coefficients)
            .expect("coefficient length matches the order");
        let loss = signal
            .loss_direct(&weights)
            .expect("grid mixtures produce valid windows");
        evaluations += 1;
        if loss < best_loss {
            best_loss = loss;
            best = coefficients.clone();
        }
    });

    Ok(GridResult {
        mixture: best,
        loss: best_loss,
        evaluations,
    })
}

/// Visits all compositions of `remaining` into the trailing coordinates in
/// lexicographic order of the full count vector.
fn enumerate_compositions(
    index: usize,
    remaining: usize,
    counts: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    if index == counts.len() - 1 {
        counts[index] = remaining;
        visit(counts);
        return;
    }
    for c in 0..=remaining {
        counts[index] = c;
        enumerate_compositions(index + 1, remaining - c, counts, visit);
    }
}

/// Outcome of face enumeration: the optimal mixture (zeros off its support),
/// its stationary-point loss, and the winning support (0-based, ascending).
#[derive(Debug, Clone)]
pub struct FaceResult {
    pub mixture: Vec<f64>,
    pub loss: f64,
    pub support: Vec<usize>,
}

/// Exact minimiser by enumeration of all non-empty simplex faces.
///
/// On each face the sum-to-one stationary point is computed from the
/// restricted program through the same bordered pseudo-inverse the projection
/// stage uses; candidates are kept when the stationarity residual is small
/// and every support coefficient clears `-1e-9`. Faces are visited in
/// lexicographic support order and a candidate must beat the incumbent by
/// more than a relative tie band to replace it, so ties resolve to the
/// lexicographically smallest support.
pub fn face_enumeration(qp: &ReducedQP) -> Result<FaceResult> {
    let order = qp.order();
    if order > MAX_FACE_ORDER {
        return Err(Error::TooManyFaces {
            order,
            max: MAX_FACE_ORDER,
        });
    }
    let scale = 1.0 + qp.r0();
    let mut best: Option<FaceResult> = None;
    let mut support = Vec::with_capacity(order);
    visit_supports(order, 0, &mut support, &mut |support| {
        let Some(candidate) = face_candidate(qp, support) else {
            return;
        };
        let improved = match &best {
            None => true,
            Some(incumbent) => candidate.loss < incumbent.loss - FACE_TIE_TOL * scale,
        };
        if improved {
            best = Some(candidate);
        }
    });
    best.ok_or(Error::EmptyActiveSet)
}

/// Depth-first enumeration of non-empty ascending index sets in
/// lexicographic order: [0], [0,1], [0,1,2], ..., [1], [1,2], ...
fn visit_supports(
    order: usize,
    next: usize,
    support: &mut Vec<usize>,
    visit: &mut impl FnMut(&[usize]),
) {
    for index in next..order {
        support.push(index);
        visit(support);
        visit_supports(order, index + 1, support, visit);
        support.pop();
    }
}

/// Stationary point of the program restricted to one face, or `None` when
/// the face yields no acceptable candidate (inconsistent stationarity or an
/// infeasible coefficient).
fn face_candidate(qp: &ReducedQP, support: &[usize]) -> Option<FaceResult> {
    let m = support.len();
    let order = qp.order();
    let scale = 1.0 + qp.r0();

    let coefficients_on_face: Vec<f64> = if m == 1 {
        // The sum constraint forces the lone coefficient.
        vec![1.0]
    } else {
        let bordered = SymmetricMatrix::from_fn(m + 1, |i, j| {
            if i < m && j < m {
                qp.q().get(support[i], support[j])
            } else if i == m && j == m {
                0.0
            } else {
                1.0
            }
        });
        let mut rhs: Vec<f64> = support.iter().map(|&i| qp.b()[i]).collect();
        rhs.push(1.0);
        let solution = solve_sym_pinv(&bordered, &rhs, DEFAULT_RANK_TOL).ok()?;
        let coefficients = solution[..m].to_vec();

        // Stationarity residual: Q_F p - b_F must be constant across the
        // face (equal to the multiplier). The bordered solve can silently
        // produce a least-squares answer on inconsistent faces; reject those.
        let multiplier = -solution[m];
        let mut residual = 0.0f64;
        for &i in support {
            let q_row: f64 = support
                .iter()
                .zip(&coefficients)
                .map(|(&j, p)| qp.q().get(i, j) * p)
                .sum();
            residual = residual.max((q_row - qp.b()[i] - multiplier).abs());
        }
        if residual > FACE_RESIDUAL_TOL * scale {
            return None;
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > 1e-8 {
            return None;
        }
        coefficients
    };

    if coefficients_on_face.iter().any(|&c| c < -FACE_FEAS_TOL) {
        return None;
    }

    let mut mixture = vec![0.0; order];
    for (&index, &value) in support.iter().zip(&coefficients_on_face) {
        mixture[index] = value.max(0.0);
    }
    // Loss from the restricted quadratic form: this is the oracle's exact
    // stationary value, independent of the clamping above.
    let mut quad = 0.0;
    let mut linear = 0.0;
    for (row, &i) in support.iter().enumerate() {
        linear += qp.b()[i] * coefficients_on_face[row];
        for (col, &j) in support.iter().enumerate() {
            quad += coefficients_on_face[row] * qp.q().get(i, j) * coefficients_on_face[col];
        }
    }
    let loss = qp.r0() - 2.0 * linear + quad;

    Some(FaceResult {
        mixture,
        loss,
        support: support.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::{build_qp, solve, SolveOptions};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn worked_signal() -> Signal {
        Signal::new(vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap()
    }

    #[test]
    fn grid_spec_counts_compositions() {
        let grid = GridSpec::new(100).unwrap();
        assert_eq!(grid.mixture_count(1), 1.0);
        assert_eq!(grid.mixture_count(2), 101.0);
        assert_eq!(grid.mixture_count(3), 5151.0);
        assert!(GridSpec::new(0).is_err());
    }

    #[test]
    fn grid_search_worked_instance() {
        let grid = GridSpec::new(100).unwrap();
        let result = grid_search(&worked_signal(), 2, &grid).unwrap();
        assert_eq!(result.evaluations, 101);
        assert_eq!(result.mixture, vec![1.0, 0.0]);
        assert!((result.loss - 12.5).abs() < 1e-9);
    }

    #[test]
    fn grid_search_order_one_has_single_candidate() {
        let grid = GridSpec::new(50).unwrap();
        let result = grid_search(&worked_signal(), 1, &grid).unwrap();
        assert_eq!(result.evaluations, 1);
        assert_eq!(result.mixture, vec![1.0]);
        assert!((result.loss - 12.5).abs() < 1e-9);
    }

    #[test]
    fn grid_search_refuses_oversized_grids() {
        let y = Signal::new((0..13).map(|i| i as f64).collect()).unwrap();
        let grid = GridSpec::new(200).unwrap();
        match grid_search(&y, 6, &grid) {
            Err(Error::GridTooLarge { estimate, limit }) => {
                assert!(estimate > limit);
            }
            other => panic!("expected GridTooLarge, got {other:?}"),
        }
    }

    #[test]
    fn grid_refines_toward_the_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(601);
        for _ in 0..5 {
            let y = Signal::new((0..7).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap();
            let report = solve(&y, 3, &SolveOptions::default()).unwrap();
            let coarse = grid_search(&y, 3, &GridSpec::new(50).unwrap()).unwrap();
            let fine = grid_search(&y, 3, &GridSpec::new(200).unwrap()).unwrap();
            assert!(fine.loss <= coarse.loss + 1e-12);
            assert!(report.loss <= fine.loss + 1e-9);
        }
    }

    #[test]
    fn face_enumeration_worked_instance() {
        let qp = build_qp(&worked_signal(), 2).unwrap();
        let result = face_enumeration(&qp).unwrap();
        assert_eq!(result.support, vec![0]);
        assert_eq!(result.mixture, vec![1.0, 0.0]);
        assert!((result.loss - 12.5).abs() < 1e-9);
    }

    #[test]
    fn face_enumeration_order_one() {
        let y = Signal::new(vec![2.0, -1.0, 0.5]).unwrap();
        let qp = build_qp(&y, 1).unwrap();
        let result = face_enumeration(&qp).unwrap();
        assert_eq!(result.support, vec![0]);
        assert_eq!(result.mixture, vec![1.0]);
    }

    #[test]
    fn face_enumeration_rejects_large_orders() {
        let y = Signal::new((0..45).map(|i| (i as f64).sin()).collect()).unwrap();
        let qp = build_qp(&y, 21).unwrap();
        assert!(matches!(
            face_enumeration(&qp),
            Err(Error::TooManyFaces { order: 21, max: 20 })
        ));
    }

    #[test]
    fn face_enumeration_degenerate_ties_pick_smallest_support() {
        let y = Signal::new(vec![4.0; 9]).unwrap();
        let qp = build_qp(&y, 4).unwrap();
        let result = face_enumeration(&qp).unwrap();
        assert_eq!(result.support, vec![0]);
        assert!(result.loss.abs() <= 1e-9 * (1.0 + qp.r0()));
    }

    #[test]
    fn oracles_agree_with_each_other_and_the_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(602);
        let grid = GridSpec::new(100).unwrap();
        for &n in &[5usize, 7, 9] {
            for _ in 0..5 {
                let y =
                    Signal::new((0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).unwrap();
                let order = y.half_width().min(3);
                let qp = build_qp(&y, order).unwrap();
                let face = face_enumeration(&qp).unwrap();
                let gridded = grid_search(&y, order, &grid).unwrap();
                let report = solve(&y, order, &SolveOptions::default()).unwrap();
                let scale = 1.0 + qp.r0();

                // Exact minimiser cannot be worse than the grid; the grid can
                // lag by at most its mesh error.
                assert!(face.loss <= gridded.loss + 1e-9 * scale);
                assert!((report.loss - face.loss).abs() <= 1e-7 * scale);

                // The face mixture prices out (through direct smoothing) at
                // its reported stationary loss.
                let weights = qp.vertices().combine(&face.mixture).unwrap();
                let direct = y.loss_direct(&weights).unwrap();
                assert!((direct - face.loss).abs() <= 1e-7 * scale);
            }
        }
    }
}
