//! Minimum-norm point in the convex hull of finitely many points.
//!
//! Given points `a_1..a_m` in `R^d`, find the point of
//! `conv{a_1, ..., a_m}` closest to the origin. The solver is Wolfe's
//! combinatorial method: it maintains a *corral*, an affinely independent
//! subset whose affine minimum-norm point has strictly positive barycentric
//! coordinates, and alternates
//!
//! - **major cycles**, which stop when the optimality certificate
//!   `min_j <x, a_j> >= |x|^2 - tol` holds and otherwise add the most
//!   violating point, and
//! - **minor cycles**, which re-solve the affine subproblem on the active set
//!   and, while any barycentric coordinate is non-positive, step from the
//!   current hull point toward the affine solution exactly as far as the
//!   nearest blocking face and drop one blocking point.
//!
//! Every choice is deterministic: ties in the entering point, in the blocking
//! face, and in the initial corral (the input point of smallest norm) are all
//! broken by the smallest index, so reruns reproduce iterate-for-iterate.
//!
//! The affine subproblem — the minimum-norm point of the affine hull of a
//! subset — is solved through the symmetric bordered system
//!
//! ```text
//! [ G  1 ] [ alpha ]   [ 0 ]
//! [ 1' 0 ] [ -mu   ] = [ 1 ]
//! ```
//!
//! with `G` the Gram matrix of the subset. The system is consistent for every
//! subset (the stationarity equations always admit a solution on the
//! sum-to-one hyperplane) but indefinite, so it is solved with the same
//! eigenvalue pseudo-inverse used elsewhere in the crate, minus the sign
//! guard. For affinely dependent subsets the pseudo-inverse picks the
//! minimum-norm coefficient vector; the resulting hull point is the same for
//! every solution of the system.

use crate::error::{Error, Result};
use crate::numerics::{dot, solve_sym_pinv, SymmetricMatrix, DEFAULT_RANK_TOL};

/// Default convergence tolerance for the optimality certificate. The
/// certificate is scaled by `1 + max_j |a_j|^2`, so this is a relative bound.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Barycentric coordinates at or below this are treated as non-positive when
/// deciding whether an affine solution stays inside the current face.
const COEFF_SIGN_TOL: f64 = 1e-12;

/// Default iteration budget for a hull of `m` points. Wolfe's method visits
/// each corral at most once, so the practical iteration count is tiny; the
/// quadratic budget is a generous safety margin.
pub fn default_max_iter(points: usize) -> usize {
    (16 * points * points).max(1000)
}

/// A finite point set in `R^d`, columns of the hull. Validated on entry:
/// non-empty, dimensions agree, all coordinates finite.
#[derive(Debug, Clone)]
pub struct PolytopePoints {
    points: Vec<Vec<f64>>,
    dim: usize,
}

impl PolytopePoints {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyActiveSet);
        };
        let dim = first.len();
        for point in &points {
            if point.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: point.len(),
                });
            }
            for (index, &value) in point.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteSample { index, value });
                }
            }
        }
        Ok(Self { points, dim })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, index: usize) -> &[f64] {
        &self.points[index]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// Result of a minimum-norm projection: the hull point, its convex
/// coefficients over the input points, and the number of major cycles.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub point: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

/// The active subset Wolfe's method walks on, with its convex coefficients.
#[derive(Debug, Clone)]
struct Corral {
    /// Indices into the point set, in insertion order.
    indices: Vec<usize>,
    /// Convex coefficients over `indices`; strictly positive between cycles.
    coefficients: Vec<f64>,
}

impl Corral {
    fn hull_point(&self, points: &PolytopePoints) -> Vec<f64> {
        let mut x = vec![0.0; points.dim()];
        for (&index, &coeff) in self.indices.iter().zip(&self.coefficients) {
            for (xi, ai) in x.iter_mut().zip(points.point(index)) {
                *xi += coeff * ai;
            }
        }
        x
    }
}

/// Minimum-norm point of the affine hull of the subset `indices`.
///
/// Returns the affine point together with its coefficients over the subset
/// (coefficients sum to one, any sign). For affinely dependent subsets the
/// coefficient vector is the minimum-norm one; the point itself is unique.
pub fn affine_min_norm(
    points: &PolytopePoints,
    indices: &[usize],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if indices.is_empty() {
        return Err(Error::EmptyActiveSet);
    }
    let m = indices.len();
    let bordered = SymmetricMatrix::from_fn(m + 1, |i, j| {
        if i < m && j < m {
            dot(points.point(indices[i]), points.point(indices[j]))
        } else if i == m && j == m {
            0.0
        } else {
            1.0
        }
    });
    let mut rhs = vec![0.0; m + 1];
    rhs[m] = 1.0;
    let solution = solve_sym_pinv(&bordered, &rhs, DEFAULT_RANK_TOL)?;
    let coefficients = solution[..m].to_vec();
    let sum: f64 = coefficients.iter().sum();
    if (sum - 1.0).abs() > 1e-8 {
        return Err(Error::AffineSumDrift { sum });
    }
    let mut point = vec![0.0; points.dim()];
    for (&index, &coeff) in indices.iter().zip(&coefficients) {
        for (xi, ai) in point.iter_mut().zip(points.point(index)) {
            *xi += coeff * ai;
        }
    }
    Ok((point, coefficients))
}

/// Wolfe's method for the minimum-norm point of `conv(points)`.
///
/// `tol` scales the optimality certificate (relative to
/// `1 + max_j |a_j|^2`); `max_iter` bounds the number of major cycles.
/// On success the coefficients lie on the unit simplex (normalised, strictly
/// within about `1e-12`), the point is their combination, and `iterations`
/// counts major cycles (zero when the initial corral is already optimal).
///
/// On an exhausted budget the error carries the best iterate so callers can
/// still report where the solver stopped.
pub fn min_norm_point(
    points: &PolytopePoints,
    tol: f64,
    max_iter: usize,
) -> Result<MinNormSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
        });
    }
    if max_iter == 0 {
        return Err(Error::InvalidParameter {
            name: "max_iter",
            value: 0.0,
        });
    }

    let m = points.len();
    let norms: Vec<f64> = (0..m)
        .map(|j| dot(points.point(j), points.point(j)))
        .collect();
    let scale = 1.0 + norms.iter().fold(0.0f64, |a, &b| a.max(b));

    // Initial corral: the single input point of smallest norm (smallest index
    // on ties).
    let start = norms
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("norms are finite"))
        .map(|(j, _)| j)
        .expect("point set is non-empty");
    let mut corral = Corral {
        indices: vec![start],
        coefficients: vec![1.0],
    };
    let mut x = points.point(start).to_vec();
    let mut iterations = 0usize;

    loop {
        let x_norm2 = dot(&x, &x);
        // Entering point: global minimiser of <x, a_j>, smallest index wins.
        let mut entering = 0usize;
        let mut min_inner = f64::INFINITY;
        for j in 0..m {
            let inner = dot(&x, points.point(j));
            if inner < min_inner {
                min_inner = inner;
                entering = j;
            }
        }
        let gap = x_norm2 - min_inner;
        if gap <= tol * scale {
            return Ok(finish(points, &corral, iterations));
        }
        let best = || MinNormSolution {
            coefficients: expand_coefficients(m, &corral),
            point: x.clone(),
            iterations,
        };
        if iterations >= max_iter {
            return Err(Error::MinNormFailure {
                iterations,
                gap,
                best: Box::new(best()),
            });
        }
        if corral.indices.contains(&entering) {
            // The certificate failed but the would-be entering point is
            // already active: numerically stalled.
            return Err(Error::MinNormFailure {
                iterations,
                gap,
                best: Box::new(best()),
            });
        }
        iterations += 1;
        corral.indices.push(entering);
        corral.coefficients.push(0.0);

        // Minor cycles: pull the corral back to one whose affine solution is
        // interior, dropping one blocking point per pass.
        loop {
            let (_, alpha) = affine_min_norm(points, &corral.indices)?;
            if alpha.iter().all(|&a| a > COEFF_SIGN_TOL) {
                corral.coefficients = alpha;
                break;
            }
            // Step from the current coefficients toward alpha until the first
            // coordinate hits zero: theta = min lambda_i / (lambda_i - alpha_i)
            // over non-positive alpha_i, smallest index on ties.
            let mut theta = f64::INFINITY;
            let mut blocking = usize::MAX;
            for (i, (&lambda_i, &alpha_i)) in
                corral.coefficients.iter().zip(&alpha).enumerate()
            {
                if alpha_i > COEFF_SIGN_TOL {
                    continue;
                }
                let denom = lambda_i - alpha_i;
                let candidate = if denom <= f64::MIN_POSITIVE {
                    0.0
                } else {
                    lambda_i / denom
                };
                if candidate < theta {
                    theta = candidate;
                    blocking = i;
                }
            }
            debug_assert!(blocking != usize::MAX, "no blocking coordinate found");
            let theta = theta.clamp(0.0, 1.0);
            for (lambda_i, &alpha_i) in corral.coefficients.iter_mut().zip(&alpha) {
                *lambda_i = (1.0 - theta) * *lambda_i + theta * alpha_i;
            }
            corral.indices.remove(blocking);
            corral.coefficients.remove(blocking);
            // Guard against drift: the remaining coefficients still sum to
            // one up to rounding; clamp stray signs.
            for c in corral.coefficients.iter_mut() {
                if *c < 0.0 {
                    *c = 0.0;
                }
            }
            if corral.indices.len() == 1 {
                corral.coefficients = vec![1.0];
                break;
            }
        }

        let x_next = corral.hull_point(points);
        debug_assert!(
            dot(&x_next, &x_next) <= dot(&x, &x) + 1e-9 * scale,
            "norm must not increase across a major cycle"
        );
        x = x_next;
    }
}

fn expand_coefficients(m: usize, corral: &Corral) -> Vec<f64> {
    let mut coefficients = vec![0.0; m];
    for (&index, &coeff) in corral.indices.iter().zip(&corral.coefficients) {
        coefficients[index] = coeff.max(0.0);
    }
    let sum: f64 = coefficients.iter().sum();
    if sum > 0.0 {
        for c in coefficients.iter_mut() {
            *c /= sum;
        }
    }
    coefficients
}

fn finish(points: &PolytopePoints, corral: &Corral, iterations: usize) -> MinNormSolution {
    let coefficients = expand_coefficients(points.len(), corral);
    // Recombine from the normalised coefficients so point and coefficients
    // are exactly consistent in the returned solution.
    let mut x = vec![0.0; points.dim()];
    for (coeff, a) in coefficients.iter().zip(points.points()) {
        if *coeff != 0.0 {
            for (xi, ai) in x.iter_mut().zip(a) {
                *xi += coeff * ai;
            }
        }
    }
    MinNormSolution {
        point: x,
        coefficients,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(raw: &[&[f64]]) -> PolytopePoints {
        PolytopePoints::new(raw.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn affine_examples() {
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let (point, alpha) = affine_min_norm(&p, &[0, 1]).unwrap();
        assert!((point[0] - 0.5).abs() < 1e-12);
        assert!((point[1] - 0.5).abs() < 1e-12);
        assert!((alpha[0] - 0.5).abs() < 1e-12);

        let single = pts(&[&[1.0, 1.0]]);
        let (point, alpha) = affine_min_norm(&single, &[0]).unwrap();
        assert_eq!(alpha, vec![1.0]);
        assert!((point[0] - 1.0).abs() < 1e-12);

        // Affine hull of (1,1) and (3,1) is the line y = 1; its minimum-norm
        // point (0,1) needs a negative affine coefficient.
        let p = pts(&[&[1.0, 1.0], &[3.0, 1.0]]);
        let (point, alpha) = affine_min_norm(&p, &[0, 1]).unwrap();
        assert!(point[0].abs() < 1e-10);
        assert!((point[1] - 1.0).abs() < 1e-10);
        assert!((alpha[0] - 1.5).abs() < 1e-10);
        assert!((alpha[1] + 0.5).abs() < 1e-10);
    }

    #[test]
    fn affine_empty_subset_errors() {
        let p = pts(&[&[1.0, 0.0]]);
        assert!(matches!(
            affine_min_norm(&p, &[]),
            Err(Error::EmptyActiveSet)
        ));
    }

    #[test]
    fn affine_handles_duplicate_points() {
        // Affinely dependent subset: the bordered system is singular but
        // consistent; the pseudo-inverse splits the weight evenly.
        let p = pts(&[&[2.0, 1.0], &[2.0, 1.0]]);
        let (point, alpha) = affine_min_norm(&p, &[0, 1]).unwrap();
        assert!((point[0] - 2.0).abs() < 1e-10);
        assert!((point[1] - 1.0).abs() < 1e-10);
        assert!((alpha[0] - 0.5).abs() < 1e-10);
        assert!((alpha[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn min_norm_simplex_midpoint() {
        let p = pts(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let sol = min_norm_point(&p, 1e-10, 100).unwrap();
        assert!((sol.point[0] - 0.5).abs() < 1e-9);
        assert!((sol.point[1] - 0.5).abs() < 1e-9);
        assert!((sol.coefficients[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn min_norm_hull_containing_origin() {
        let p = pts(&[&[1.0, 0.0], &[-1.0, 1.0], &[-1.0, -1.0]]);
        let sol = min_norm_point(&p, 1e-10, 100).unwrap();
        let norm2 = dot(&sol.point, &sol.point);
        assert!(norm2 < 1e-9, "norm^2 = {norm2}");
    }

    #[test]
    fn min_norm_single_point() {
        let p = pts(&[&[3.0, 4.0]]);
        let sol = min_norm_point(&p, 1e-10, 10).unwrap();
        assert_eq!(sol.coefficients, vec![1.0]);
        assert_eq!(sol.iterations, 0);
        assert!((dot(&sol.point, &sol.point) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_coincident_points_keep_first_vertex() {
        let p = pts(&[&[1.0, 2.0], &[1.0, 2.0], &[1.0, 2.0]]);
        let sol = min_norm_point(&p, 1e-10, 10).unwrap();
        assert_eq!(sol.coefficients, vec![1.0, 0.0, 0.0]);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn min_norm_certificate_and_feasibility_on_random_hulls() {
        let mut rng = ChaCha8Rng::seed_from_u64(401);
        for _ in 0..50 {
            let m = 1 + (rng.random::<f64>() * 5.0) as usize;
            let d = 1 + (rng.random::<f64>() * 5.0) as usize;
            let points: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect())
                .collect();
            let p = PolytopePoints::new(points).unwrap();
            let sol = min_norm_point(&p, 1e-10, default_max_iter(m)).unwrap();

            // Coefficients lie on the simplex.
            let sum: f64 = sol.coefficients.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12);
            assert!(sol.coefficients.iter().all(|&c| c >= -1e-12));

            // The point is the stated combination.
            let mut x = vec![0.0; d];
            for (c, a) in sol.coefficients.iter().zip(p.points()) {
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi += c * ai;
                }
            }
            for (a, b) in x.iter().zip(&sol.point) {
                assert!((a - b).abs() <= 1e-12);
            }

            // Optimality certificate.
            let x_norm2 = dot(&sol.point, &sol.point);
            let scale = 1.0
                + (0..m)
                    .map(|j| dot(p.point(j), p.point(j)))
                    .fold(0.0f64, f64::max);
            for j in 0..m {
                let inner = dot(&sol.point, p.point(j));
                assert!(
                    inner >= x_norm2 - 1e-9 * scale,
                    "certificate violated: {inner} < {x_norm2}"
                );
            }
        }
    }

    #[test]
    fn min_norm_matches_dense_grid_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(402);
        for trial in 0..50 {
            let m = 1 + trial % 5;
            let d = 1 + (trial / 5) % 5;
            let points: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let p = PolytopePoints::new(points).unwrap();
            let sol = min_norm_point(&p, 1e-10, default_max_iter(m)).unwrap();
            let solver_norm2 = dot(&sol.point, &sol.point);

            // Dense simplex grid: resolution shrinks with m to keep the
            // composition count workable; the comparison bound widens in
            // step because the grid can miss the optimum by one cell.
            let resolution = match m {
                1 => 1,
                2 | 3 => 200,
                4 => 100,
                _ => 60,
            };
            let grid_norm2 = grid_min_norm2(&p, resolution);
            // |f(p) - f(p*)| <= 2 * g * |p - p*|_1 with g = max |a_j|^2 and
            // the grid within 2 m / resolution of any simplex point in l1.
            let g = (0..m)
                .map(|j| dot(p.point(j), p.point(j)))
                .fold(0.0f64, f64::max);
            let bound = 4.0 * g * m as f64 / resolution as f64 + 1e-9;
            assert!(
                solver_norm2 <= grid_norm2 + 1e-9,
                "solver {solver_norm2} worse than grid {grid_norm2}"
            );
            assert!(
                grid_norm2 <= solver_norm2 + bound,
                "grid {grid_norm2} too far above solver {solver_norm2} (bound {bound})"
            );
        }
    }

    /// Brute-force minimum over the simplex grid with the given resolution.
    fn grid_min_norm2(p: &PolytopePoints, resolution: usize) -> f64 {
        let m = p.len();
        let mut best = f64::INFINITY;
        let mut counts = vec![0usize; m];
        grid_rec(p, resolution, 0, resolution, &mut counts, &mut best);
        best
    }

    fn grid_rec(
        p: &PolytopePoints,
        resolution: usize,
        i: usize,
        remaining: usize,
        counts: &mut Vec<usize>,
        best: &mut f64,
    ) {
        let m = p.len();
        if i == m - 1 {
            counts[i] = remaining;
            let mut x = vec![0.0; p.dim()];
            for (j, &c) in counts.iter().enumerate() {
                let coeff = c as f64 / resolution as f64;
                for (xi, ai) in x.iter_mut().zip(p.point(j)) {
                    *xi += coeff * ai;
                }
            }
            let norm2 = dot(&x, &x);
            if norm2 < *best {
                *best = norm2;
            }
            return;
        }
        for c in 0..=remaining {
            counts[i] = c;
            grid_rec(p, resolution, i + 1, remaining - c, counts, best);
        }
    }

    #[test]
    fn min_norm_is_rotation_invariant_in_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(403);
        for _ in 0..20 {
            let d = 3;
            let m = 4;
            let points: Vec<Vec<f64>> = (0..m)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let rotation = random_rotation(&mut rng, d);
            let rotated: Vec<Vec<f64>> = points
                .iter()
                .map(|point| {
                    (0..d)
                        .map(|i| (0..d).map(|j| rotation[i][j] * point[j]).sum())
                        .collect()
                })
                .collect();
            let a = min_norm_point(&PolytopePoints::new(points).unwrap(), 1e-10, 1000).unwrap();
            let b = min_norm_point(&PolytopePoints::new(rotated).unwrap(), 1e-10, 1000).unwrap();
            let na = dot(&a.point, &a.point).sqrt();
            let nb = dot(&b.point, &b.point).sqrt();
            assert!((na - nb).abs() <= 1e-9 * (1.0 + na));
        }
    }

    /// Random orthogonal matrix from Gram-Schmidt on a random square matrix.
    fn random_rotation(rng: &mut ChaCha8Rng, d: usize) -> Vec<Vec<f64>> {
        loop {
            let mut basis: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
                .collect();
            let mut ok = true;
            for i in 0..d {
                for j in 0..i {
                    let proj = dot(&basis[i], &basis[j]);
                    let prev = basis[j].clone();
                    for (v, p) in basis[i].iter_mut().zip(&prev) {
                        *v -= proj * p;
                    }
                }
                let norm = dot(&basis[i], &basis[i]).sqrt();
                if norm < 1e-6 {
                    ok = false;
                    break;
                }
                basis[i].iter_mut().for_each(|v| *v /= norm);
            }
            if ok {
                return basis;
            }
        }
    }

    #[test]
    fn min_norm_exhausted_budget_carries_best_iterate() {
        // The standard basis of R^3 needs two major cycles to reach the
        // barycentre; a budget of one must fail and expose its iterate.
        let p = pts(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        match min_norm_point(&p, 1e-10, 1) {
            Err(Error::MinNormFailure { iterations, gap, best }) => {
                assert_eq!(iterations, 1);
                assert!(gap > 0.0);
                let sum: f64 = best.coefficients.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
            }
            other => panic!("expected MinNormFailure, got {other:?}"),
        }
        // With an adequate budget the same instance converges to the centre.
        let sol = min_norm_point(&p, 1e-10, 100).unwrap();
        for c in &sol.coefficients {
            assert!((c - 1.0 / 3.0).abs() < 1e-9);
        }
        assert_eq!(sol.iterations, 2);
    }

    #[test]
    fn min_norm_validates_parameters() {
        let p = pts(&[&[1.0]]);
        assert!(matches!(
            min_norm_point(&p, 0.0, 10),
            Err(Error::InvalidParameter { name: "tol", .. })
        ));
        assert!(matches!(
            min_norm_point(&p, 1e-10, 0),
            Err(Error::InvalidParameter { name: "max_iter", .. })
        ));
    }

    #[test]
    fn points_validation() {
        assert!(matches!(
            PolytopePoints::new(vec![]),
            Err(Error::EmptyActiveSet)
        ));
        assert!(matches!(
            PolytopePoints::new(vec![vec![1.0], vec![1.0, 2.0]]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            PolytopePoints::new(vec![vec![f64::NAN]]),
            Err(Error::NonFiniteSample { .. })
        ));
    }
}
