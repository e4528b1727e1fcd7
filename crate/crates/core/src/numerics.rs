//! Dense symmetric linear algebra for small matrices.
//!
//! Everything in this crate reduces to operations on symmetric matrices whose
//! dimension is the signal length or the window order, so a dense direct
//! method is both sufficient and the most predictable choice. The workhorse is
//! a cyclic Jacobi eigendecomposition; rank-aware pseudo-inverse solves and
//! the positive semi-definite square root are built on top of it.
//!
//! Conventions:
//! - matrices are stored row-major with exact symmetry (`a[i][j] == a[j][i]`
//!   bit for bit),
//! - eigenvalues are returned in descending order with orthonormal
//!   eigenvectors in matching column order,
//! - pseudo-inverse solves clip eigenvalues at `rank_tol * lambda_max` and
//!   treat anything below the clip as zero.

use crate::error::{Error, Result};

/// Default relative eigenvalue clip used by the solver pipeline whenever a
/// caller does not specify one.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Maximum number of Jacobi sweeps before giving up. Convergence is
/// quadratic once the off-diagonal mass is small; well-posed inputs finish in
/// well under ten sweeps.
const MAX_SWEEPS: usize = 64;

/// A dense symmetric matrix with exactly mirrored storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Creates the zero matrix of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Builds a matrix by evaluating `f(i, j)` for `i <= j` and mirroring the
    /// result, so symmetry holds exactly no matter how `f` rounds.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Builds a matrix from explicit rows, checking shape and symmetry.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        for row in rows {
            if row.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
        }
        Ok(Self::from_fn(dim, |i, j| {
            debug_assert!(
                rows[i][j] == rows[j][i],
                "from_rows requires exactly symmetric input"
            );
            rows[i][j]
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Sets `(i, j)` and `(j, i)` simultaneously.
    pub fn set_sym(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok((0..self.dim)
            .map(|i| {
                let row = &self.data[i * self.dim..(i + 1) * self.dim];
                dot(row, x)
            })
            .collect())
    }

    /// The quadratic form `x' S x`.
    pub fn quadratic_form(&self, x: &[f64]) -> Result<f64> {
        let sx = self.mul_vec(x)?;
        Ok(dot(x, &sx))
    }

    /// Largest absolute entry; a cheap scale estimate.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entrywise maximum absolute difference to another matrix.
    pub fn max_abs_diff(&self, other: &SymmetricMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Plain dot product. Kept pub(crate) because half the crate needs it.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Eigendecomposition of a symmetric matrix: `values` in descending order,
/// `vectors[j]` the orthonormal eigenvector paired with `values[j]`.
#[derive(Debug, Clone)]
pub struct SymmetricEig {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Full eigendecomposition via cyclic Jacobi rotations.
///
/// Rotations are applied in row-cyclic order until the off-diagonal Frobenius
/// mass falls below `1e-14` relative to the matrix scale. Errors only if the
/// sweep cap is exhausted, which for symmetric input indicates non-finite
/// entries rather than slow convergence.
pub fn eig_sym(s: &SymmetricMatrix) -> Result<SymmetricEig> {
    let n = s.dim;
    if n == 0 {
        return Ok(SymmetricEig {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut a = s.data.clone();
    // Eigenvector accumulator, row-major; starts as the identity.
    let mut u = vec![0.0; n * n];
    for i in 0..n {
        u[i * n + i] = 1.0;
    }

    let scale = s.max_abs();
    let stop = 1e-14 * scale.max(f64::MIN_POSITIVE);

    let mut converged = scale == 0.0 || n == 1;
    if !converged {
        for _sweep in 0..MAX_SWEEPS {
            let off = off_diagonal_norm(&a, n);
            if off <= stop {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[q * n + q];
                    let tau = (aqq - app) / (2.0 * apq);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let sn = t * c;

                    // A <- J' A J applied as a column update then a row update.
                    for i in 0..n {
                        let aip = a[i * n + p];
                        let aiq = a[i * n + q];
                        a[i * n + p] = c * aip - sn * aiq;
                        a[i * n + q] = sn * aip + c * aiq;
                    }
                    for j in 0..n {
                        let apj = a[p * n + j];
                        let aqj = a[q * n + j];
                        a[p * n + j] = c * apj - sn * aqj;
                        a[q * n + j] = sn * apj + c * aqj;
                    }
                    // The rotation annihilates this pair by construction.
                    a[p * n + q] = 0.0;
                    a[q * n + p] = 0.0;

                    for i in 0..n {
                        let uip = u[i * n + p];
                        let uiq = u[i * n + q];
                        u[i * n + p] = c * uip - sn * uiq;
                        u[i * n + q] = sn * uip + c * uiq;
                    }
                }
            }
        }
        if !converged {
            converged = off_diagonal_norm(&a, n) <= stop;
        }
    }
    if !converged {
        return Err(Error::EigNonConvergence { sweeps: MAX_SWEEPS });
    }

    // Sort eigenpairs by descending eigenvalue; ties keep diagonal order so
    // the result is deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[j * n + j]
            .partial_cmp(&a[i * n + i])
            .expect("eigenvalues are finite")
    });
    let values = order.iter().map(|&j| a[j * n + j]).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|i| u[i * n + j]).collect())
        .collect();
    Ok(SymmetricEig { values, vectors })
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = a[i * n + j];
            sum += 2.0 * v * v;
        }
    }
    sum.sqrt()
}

/// Solves `S x = c` for positive semi-definite `S` through the eigenvalue
/// pseudo-inverse: eigenvalues at or below `rank_tol * lambda_max` are treated
/// as zero, so for singular consistent systems this returns the minimum-norm
/// solution.
///
/// Errors with [`Error::NotPsd`] if an eigenvalue falls below
/// `-rank_tol * lambda_max`.
pub fn solve_psd(s: &SymmetricMatrix, c: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    if c.len() != s.dim {
        return Err(Error::LengthMismatch {
            expected: s.dim,
            got: c.len(),
        });
    }
    let eig = eig_sym(s)?;
    let scale = eigen_scale(&eig.values);
    if let Some(&lambda_min) = eig.values.last() {
        if lambda_min < -rank_tol * scale {
            return Err(Error::NotPsd {
                eigenvalue: lambda_min,
                tol: rank_tol,
                scale,
            });
        }
    }
    Ok(pinv_apply(&eig, c, rank_tol * scale, false))
}

/// Solves `S x = c` for a general symmetric `S` through the same eigenvalue
/// pseudo-inverse convention as [`solve_psd`], but without the sign guard.
/// This is what the affine subproblems use: their bordered KKT matrices are
/// symmetric and consistent but indefinite.
pub(crate) fn solve_sym_pinv(s: &SymmetricMatrix, c: &[f64], rank_tol: f64) -> Result<Vec<f64>> {
    if c.len() != s.dim {
        return Err(Error::LengthMismatch {
            expected: s.dim,
            got: c.len(),
        });
    }
    let eig = eig_sym(s)?;
    let scale = eigen_scale(&eig.values);
    Ok(pinv_apply(&eig, c, rank_tol * scale, true))
}

fn eigen_scale(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Applies the clipped pseudo-inverse `S^+ c` given the eigendecomposition.
/// With `signed` set, eigenvalues of either sign above the threshold in
/// magnitude are inverted; otherwise only positive ones are.
fn pinv_apply(eig: &SymmetricEig, c: &[f64], threshold: f64, signed: bool) -> Vec<f64> {
    let n = c.len();
    let mut x = vec![0.0; n];
    for (lambda, vector) in eig.values.iter().zip(&eig.vectors) {
        let keep = if signed {
            lambda.abs() > threshold
        } else {
            *lambda > threshold
        };
        if !keep {
            continue;
        }
        let coeff = dot(vector, c) / lambda;
        for (xi, vi) in x.iter_mut().zip(vector) {
            *xi += coeff * vi;
        }
    }
    x
}

/// The symmetric positive semi-definite square root `A` with `A A = S`.
///
/// Eigenvalues in `[-clip_tol * lambda_max, 0)` are clipped to zero before
/// taking square roots; anything lower raises [`Error::NotPsd`].
pub fn sqrt_psd(s: &SymmetricMatrix, clip_tol: f64) -> Result<SymmetricMatrix> {
    let eig = eig_sym(s)?;
    let scale = eigen_scale(&eig.values);
    if let Some(&lambda_min) = eig.values.last() {
        if lambda_min < -clip_tol * scale {
            return Err(Error::NotPsd {
                eigenvalue: lambda_min,
                tol: clip_tol,
                scale,
            });
        }
    }
    let n = s.dim;
    let roots: Vec<f64> = eig.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    Ok(SymmetricMatrix::from_fn(n, |i, j| {
        roots
            .iter()
            .zip(&eig.vectors)
            .map(|(r, u)| r * u[i] * u[j])
            .sum()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(rng: &mut ChaCha8Rng, dim: usize) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(dim, |_, _| rng.random::<f64>() * 2.0 - 1.0)
    }

    /// Random Gram matrix M'M: positive semi-definite by construction.
    fn random_gram(rng: &mut ChaCha8Rng, dim: usize) -> SymmetricMatrix {
        let m: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
            .collect();
        SymmetricMatrix::from_fn(dim, |i, j| (0..dim).map(|k| m[k][i] * m[k][j]).sum())
    }

    fn reconstruct(eig: &SymmetricEig, dim: usize) -> SymmetricMatrix {
        SymmetricMatrix::from_fn(dim, |i, j| {
            eig.values
                .iter()
                .zip(&eig.vectors)
                .map(|(l, u)| l * u[i] * u[j])
                .sum()
        })
    }

    #[test]
    fn eig_identity_is_all_ones() {
        let s = SymmetricMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.0 });
        let eig = eig_sym(&s).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn eig_diagonal_sorts_descending_with_axis_vectors() {
        let s = SymmetricMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => 4.0,
            (1, 1) => 9.0,
            _ => 0.0,
        });
        let eig = eig_sym(&s).unwrap();
        assert_eq!(eig.values, vec![9.0, 4.0]);
        // Eigenvectors are axis-aligned up to sign.
        assert!((eig.vectors[0][1].abs() - 1.0).abs() < 1e-12);
        assert!(eig.vectors[0][0].abs() < 1e-12);
        assert!((eig.vectors[1][0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for trial in 0..100 {
            let dim = 1 + trial % 12;
            let s = random_symmetric(&mut rng, dim);
            let eig = eig_sym(&s).unwrap();
            let back = reconstruct(&eig, dim);
            let tol = 1e-10 * s.max_abs().max(1.0);
            assert!(
                s.max_abs_diff(&back) <= tol,
                "reconstruction off by {} at dim {}",
                s.max_abs_diff(&back),
                dim
            );
        }
    }

    #[test]
    fn eig_vectors_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(102);
        for _ in 0..20 {
            let dim = 2 + (rng.random::<f64>() * 9.0) as usize;
            let s = random_symmetric(&mut rng, dim);
            let eig = eig_sym(&s).unwrap();
            for i in 0..dim {
                for j in 0..dim {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    let got = dot(&eig.vectors[i], &eig.vectors[j]);
                    assert!(
                        (got - expected).abs() < 1e-10,
                        "inner product ({i},{j}) = {got}"
                    );
                }
            }
        }
    }

    #[test]
    fn eig_zero_matrix() {
        let eig = eig_sym(&SymmetricMatrix::zeros(4)).unwrap();
        assert_eq!(eig.values, vec![0.0; 4]);
    }

    #[test]
    fn solve_psd_identity_returns_rhs() {
        let s = SymmetricMatrix::from_fn(3, |i, j| if i == j { 1.0 } else { 0.0 });
        let x = solve_psd(&s, &[3.0, -1.0, 2.0], 1e-10).unwrap();
        for (got, want) in x.iter().zip([3.0, -1.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_psd_singular_uses_pseudo_inverse() {
        // diag(2, 0) with c = (4, 0): the minimum-norm solution is (2, 0).
        let s = SymmetricMatrix::from_fn(2, |i, j| if i == 0 && j == 0 { 2.0 } else { 0.0 });
        let x = solve_psd(&s, &[4.0, 0.0], 1e-10).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!(x[1].abs() < 1e-12);
    }

    #[test]
    fn solve_psd_recovers_planted_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(103);
        for trial in 0..50 {
            let dim = 1 + trial % 10;
            // Shifted Gram matrix: full rank with a modest condition number.
            let mut s = random_gram(&mut rng, dim);
            for i in 0..dim {
                s.set_sym(i, i, s.get(i, i) + 1.0);
            }
            let x_star: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let c = s.mul_vec(&x_star).unwrap();
            let x = solve_psd(&s, &c, 1e-10).unwrap();
            let norm = dot(&x_star, &x_star).sqrt().max(1e-30);
            let err = x
                .iter()
                .zip(&x_star)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-8 * norm, "solve error {err} at dim {dim}");
        }
    }

    #[test]
    fn solve_psd_rejects_negative_definite() {
        let s = SymmetricMatrix::from_fn(2, |i, j| if i == j { -1.0 } else { 0.0 });
        match solve_psd(&s, &[1.0, 1.0], 1e-10) {
            Err(Error::NotPsd { eigenvalue, .. }) => assert!(eigenvalue < 0.0),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn solve_psd_zero_matrix_maps_to_zero() {
        let x = solve_psd(&SymmetricMatrix::zeros(3), &[1.0, 2.0, 3.0], 1e-10).unwrap();
        assert_eq!(x, vec![0.0; 3]);
    }

    #[test]
    fn solve_sym_pinv_handles_indefinite_systems() {
        // Bordered saddle matrix [[1, 1], [1, 0]] is indefinite but regular:
        // the system reads x0 + x1 = 0, x0 = 1.
        let s = SymmetricMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let x = solve_sym_pinv(&s, &[0.0, 1.0], 1e-12).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-10);
        assert!((x[1] + 1.0).abs() < 1e-10);
    }

    #[test]
    fn sqrt_psd_diagonal() {
        let s = SymmetricMatrix::from_rows(&[vec![4.0, 0.0], vec![0.0, 9.0]]).unwrap();
        let a = sqrt_psd(&s, 1e-10).unwrap();
        assert!((a.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((a.get(1, 1) - 3.0).abs() < 1e-12);
        assert!(a.get(0, 1).abs() < 1e-12);
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(104);
        for trial in 0..100 {
            let dim = 1 + trial % 10;
            let s = random_gram(&mut rng, dim);
            let a = sqrt_psd(&s, 1e-10).unwrap();
            let aa = SymmetricMatrix::from_fn(dim, |i, j| {
                (0..dim).map(|k| a.get(i, k) * a.get(k, j)).sum()
            });
            let tol = 1e-8 * s.max_abs().max(1.0);
            assert!(
                s.max_abs_diff(&aa) <= tol,
                "square-back off by {}",
                s.max_abs_diff(&aa)
            );
            // Output is symmetric by storage and PSD by spectrum.
            let eig = eig_sym(&a).unwrap();
            assert!(eig.values.last().copied().unwrap_or(0.0) >= -1e-10 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn sqrt_psd_rejects_clearly_indefinite() {
        let s = SymmetricMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert!(matches!(sqrt_psd(&s, 1e-10), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn mul_vec_checks_length() {
        let s = SymmetricMatrix::zeros(3);
        assert!(matches!(
            s.mul_vec(&[1.0]),
            Err(Error::LengthMismatch { expected: 3, got: 1 })
        ));
    }
}
