//! Cyclic signals and their second-order statistics.
//!
//! A signal `y` of odd length `N = 2K + 1` is treated as one period of a
//! cyclic sequence, indexed 1-based: `y[n]` for any integer `n` means
//! `y[((n - 1) mod N) + 1]`. Smoothing replaces each sample with a weighted
//! average of its cyclic neighbourhood,
//!
//! ```text
//! x[n] = sum_{k = -K..K} w[k] * y[n + k],
//! ```
//!
//! and the quality of a weight window `w` is the cumulative squared error
//! `L(w) = sum_n (y[n] - x[n])^2`. Because the averaging is cyclic, `L`
//! depends on `y` only through its cyclic autocorrelation
//! `r[t] = sum_n y[n] * y[n + t]`, which satisfies `r[t] = r[-t]` and
//! `r[t] = r[N + t]`. Collecting the lags into a vector `r` and the
//! symmetric Toeplitz-like matrix `R[i][j] = r[j - i]` gives the exact
//! identity
//!
//! ```text
//! L(w) = r[0] - 2 w'r + w'Rw,
//! ```
//!
//! which is what the reduced quadratic program in [`crate::qp`] is built on.
//! `R` is positive semi-definite: it is the Gram matrix of the cyclic shifts
//! of `y` (see [`Signal::shift_matrix`]).

use crate::error::{Error, Result};
use crate::numerics::{dot, SymmetricMatrix};

/// Tolerance on `|sum(w) - 1|` accepted by the averaging entry points.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;
/// Most negative weight entry accepted by the averaging entry points;
/// anything above this is treated as rounding noise from upstream algebra.
pub const WEIGHT_SIGN_TOL: f64 = -1e-12;

/// One period of a cyclic signal. Guaranteed non-empty, of odd length at
/// least 3, with all samples finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    /// Validates and wraps one period of samples.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::TooShort(n));
        }
        if n % 2 == 0 {
            return Err(Error::EvenLength(n));
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteSample { index, value });
            }
        }
        Ok(Self { values })
    }

    /// Period length `N` (odd, at least 3).
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Never true; present so length checks read naturally at call sites.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Window half-width `K = (N - 1) / 2`.
    pub fn half_width(&self) -> usize {
        (self.values.len() - 1) / 2
    }

    /// The stored period.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// 1-based cyclic access: `cyclic_get(n)` is `y[((n - 1) mod N) + 1]` for
    /// any integer `n`, so `cyclic_get(0)` is the last sample and
    /// `cyclic_get(N + 1)` wraps back to the first.
    pub fn cyclic_get(&self, n: i64) -> f64 {
        self.values[self.wrap(n as i128)]
    }

    /// Maps a 1-based cyclic index to a 0-based buffer offset. Interim
    /// arithmetic is widened so the reduction is total over all of `i64`.
    fn wrap(&self, one_based: i128) -> usize {
        let n = self.values.len() as i128;
        ((one_based - 1).rem_euclid(n)) as usize
    }

    /// Cyclic autocorrelation at lag `t`: `r[t] = sum_n y[n] * y[n + t]`.
    pub fn autocorrelation(&self, t: i64) -> f64 {
        let n = self.values.len();
        (1..=n as i128)
            .map(|m| self.values[(m - 1) as usize] * self.values[self.wrap(m + t as i128)])
            .sum()
    }

    /// All autocorrelation lags needed by the quadratic program, computed
    /// once: the lag vector over `t = -K..K` and the matrix
    /// `R[i][j] = r[j - i]`.
    ///
    /// The lag symmetry `r[t] = r[-t]` is imposed structurally (each lag is
    /// computed once and mirrored), so downstream identities hold to the last
    /// bit rather than to rounding error.
    pub fn autocorr_stats(&self) -> AutocorrStats {
        let n = self.values.len();
        let k = self.half_width();
        let mut lags = vec![0.0; n];
        for t in 0..=k {
            let value = self.autocorrelation(t as i64);
            lags[k + t] = value;
            lags[k - t] = value;
        }
        let matrix = SymmetricMatrix::from_fn(n, |i, j| {
            let mut d = j as i64 - i as i64; // in 0..N, reduce to -K..K
            if d > k as i64 {
                d -= n as i64;
            }
            lags[(d + k as i64) as usize]
        });
        AutocorrStats {
            half_width: k,
            lags,
            matrix,
        }
    }

    /// Applies a full-length cyclic weight window:
    /// `x[n] = sum_{k = -K..K} w[k] * y[n + k]`, with `w` laid out over
    /// offsets `-K..K` (index `K` is the centre).
    ///
    /// The window must have length `N`, entries no smaller than
    /// [`WEIGHT_SIGN_TOL`], and sum to 1 within [`WEIGHT_SUM_TOL`].
    pub fn apply_window(&self, weights: &[f64]) -> Result<Vec<f64>> {
        self.check_weights(weights)?;
        let n = self.values.len();
        let k = self.half_width();
        Ok((0..n)
            .map(|n0| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(j, w)| w * self.values[(n0 + j + n - k) % n])
                    .sum()
            })
            .collect())
    }

    /// Cumulative squared smoothing error `L(w) = sum_n (y[n] - x[n])^2`,
    /// evaluated directly from the smoothed samples. This is the reference
    /// loss; the solver recomputes its reported loss through this function
    /// rather than trusting its own algebra.
    pub fn loss_direct(&self, weights: &[f64]) -> Result<f64> {
        let smoothed = self.apply_window(weights)?;
        Ok(self
            .values
            .iter()
            .zip(&smoothed)
            .map(|(y, x)| (y - x) * (y - x))
            .sum())
    }

    fn check_weights(&self, weights: &[f64]) -> Result<()> {
        let n = self.values.len();
        if weights.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: weights.len(),
            });
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(value >= WEIGHT_SIGN_TOL) {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if !((sum - 1.0).abs() <= WEIGHT_SUM_TOL) {
            return Err(Error::NotNormalized {
                sum,
                tol: WEIGHT_SUM_TOL,
            });
        }
        Ok(())
    }

    /// The matrix of all cyclic shifts of the signal: column `t` (0-based)
    /// holds the signal advanced by `t + 1` positions. Its Gram matrix equals
    /// the autocorrelation matrix up to rounding, which is the structural
    /// reason `R` is positive semi-definite.
    pub fn shift_matrix(&self) -> ShiftMatrix {
        let n = self.values.len();
        let columns = (1..=n)
            .map(|shift| {
                (0..n)
                    .map(|m0| self.values[(m0 + shift) % n])
                    .collect::<Vec<f64>>()
            })
            .collect();
        ShiftMatrix { columns }
    }
}

/// Precomputed cyclic autocorrelation of one signal.
#[derive(Debug, Clone)]
pub struct AutocorrStats {
    half_width: usize,
    /// Lags `r[-K] .. r[K]` stored left to right; index `K` is lag 0.
    lags: Vec<f64>,
    /// `R[i][j] = r[j - i]` with indices reduced cyclically.
    matrix: SymmetricMatrix,
}

impl AutocorrStats {
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Lag value `r[t]` for any integer `t`, reduced periodically.
    pub fn r(&self, t: i64) -> f64 {
        let n = self.lags.len() as i128;
        let mut d = (t as i128).rem_euclid(n); // 0..N
        if d > self.half_width as i128 {
            d -= n;
        }
        self.lags[(d + self.half_width as i128) as usize]
    }

    /// Zero-lag value `r[0] = sum_n y[n]^2`, the natural loss scale.
    pub fn r0(&self) -> f64 {
        self.lags[self.half_width]
    }

    /// Lags over `t = -K..K` as a slice aligned with full-length windows.
    pub fn lag_vector(&self) -> &[f64] {
        &self.lags
    }

    /// The autocorrelation matrix `R`.
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    /// Evaluates the loss through the quadratic identity
    /// `r[0] - 2 w'r + w'Rw` instead of smoothing. Exposed mainly for tests
    /// and diagnostics; the two routes agree to rounding error.
    pub fn loss_quadratic(&self, weights: &[f64]) -> Result<f64> {
        if weights.len() != self.lags.len() {
            return Err(Error::LengthMismatch {
                expected: self.lags.len(),
                got: weights.len(),
            });
        }
        let quad = self.matrix.quadratic_form(weights)?;
        Ok(self.r0() - 2.0 * dot(weights, &self.lags) + quad)
    }
}

/// All cyclic shifts of a signal, one shift per column.
#[derive(Debug, Clone)]
pub struct ShiftMatrix {
    columns: Vec<Vec<f64>>,
}

impl ShiftMatrix {
    /// Number of rows and columns (both equal the signal length).
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Column `t` (0-based): the signal advanced by `t + 1` positions.
    pub fn column(&self, t: usize) -> &[f64] {
        &self.columns[t]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Gram matrix of the shift columns; equals the autocorrelation matrix up
    /// to rounding.
    pub fn gram(&self) -> SymmetricMatrix {
        let n = self.columns.len();
        SymmetricMatrix::from_fn(n, |i, j| dot(&self.columns[i], &self.columns[j]))
    }
}
