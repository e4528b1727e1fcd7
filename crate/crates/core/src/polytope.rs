//! The tapered symmetric window class as a convex polytope.
//!
//! A valid window of half-width `K` is symmetric (`w[k] == w[-k]`), puts no
//! weight on the centre (`w[0] == 0`), tapers outward
//! (`w[1] >= w[2] >= ... >= w[K] >= 0`), and sums to one. This set is a
//! convex polytope whose vertices are the flat two-sided boxes
//!
//! ```text
//! v_i[k] = 1 / (2 i)   for 1 <= |k| <= i,      i = 1..m,
//! ```
//!
//! zero elsewhere. Every valid window is a unique convex mixture of these
//! vertices, so optimising over windows reduces to optimising over mixture
//! coefficients on the unit simplex. The inverse map is a telescoping read of
//! consecutive weight differences: `p[i] = 2 i * (w[i] - w[i + 1])` with
//! `w[m + 1]` taken as zero.
//!
//! An order `m` below the signal half-width `K` embeds the same vertices in
//! full-length windows with zero outer weights, which restricts the averaging
//! span without changing the geometry.

use crate::error::{Error, Result};
use thiserror::Error;

/// Upper bound on the window order; far beyond any practical signal and only
/// here so index arithmetic can never overflow.
pub const MAX_ORDER: usize = 1_000_000;

/// Default tolerance used by window validation.
pub const VALIDATE_TOL: f64 = 1e-9;

/// Tolerance on `|sum(p) - 1|` accepted by [`Mixture::new`].
pub const MIXTURE_SUM_TOL: f64 = 1e-9;
/// Most negative mixture entry accepted by [`Mixture::new`].
pub const MIXTURE_SIGN_TOL: f64 = -1e-12;

/// How a candidate window violates the tapered symmetric class. Checks run in
/// a fixed order (length, centre, symmetry, tapering, sign, sum) and the
/// first failure is reported.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum WindowViolation {
    #[error("window length must be odd and at least 3: got {0}")]
    BadLength(usize),
    #[error("centre weight must be zero: got {0}")]
    CentreNonzero(f64),
    #[error("window must be symmetric: offset {offset} has {right} forward but {left} backward")]
    Asymmetric { offset: usize, left: f64, right: f64 },
    #[error("window must taper: offset {near} has weight {near_value} below offset {far}'s {far_value}")]
    NotTapering {
        near: usize,
        far: usize,
        near_value: f64,
        far_value: f64,
    },
    #[error("weight at offset {offset} is negative: {value}")]
    NegativeWeight { offset: usize, value: f64 },
    #[error("weights must sum to 1: got {sum}")]
    SumNotOne { sum: f64 },
}

/// Checks membership of `weights` (offsets `-K..K`, centre at index `K`) in
/// the tapered symmetric class, within an absolute tolerance per comparison.
pub fn validate_window(weights: &[f64], tol: f64) -> Result<(), WindowViolation> {
    let n = weights.len();
    if n < 3 || n % 2 == 0 {
        return Err(WindowViolation::BadLength(n));
    }
    let k = (n - 1) / 2;
    let centre = weights[k];
    if centre.abs() > tol {
        return Err(WindowViolation::CentreNonzero(centre));
    }
    for offset in 1..=k {
        let right = weights[k + offset];
        let left = weights[k - offset];
        if (right - left).abs() > tol {
            return Err(WindowViolation::Asymmetric {
                offset,
                left,
                right,
            });
        }
    }
    for offset in 1..k {
        let near = weights[k + offset];
        let far = weights[k + offset + 1];
        if near < far - tol {
            return Err(WindowViolation::NotTapering {
                near: offset,
                far: offset + 1,
                near_value: near,
                far_value: far,
            });
        }
    }
    for offset in 1..=k {
        let value = weights[k + offset];
        if value < -tol {
            return Err(WindowViolation::NegativeWeight { offset, value });
        }
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > tol {
        return Err(WindowViolation::SumNotOne { sum });
    }
    Ok(())
}

/// A validated member of the tapered symmetric window class.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    weights: Vec<f64>,
}

impl Window {
    /// Validates with the default tolerance and wraps.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        Self::with_tol(weights, VALIDATE_TOL)
    }

    /// Validates with an explicit tolerance and wraps.
    pub fn with_tol(weights: Vec<f64>, tol: f64) -> Result<Self> {
        validate_window(&weights, tol)?;
        Ok(Self { weights })
    }

    /// Weights over offsets `-K..K`; index `K` is the centre.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> usize {
        (self.weights.len() - 1) / 2
    }
}

/// Mixture coefficients over the polytope vertices: a point of the unit
/// simplex (up to tiny rounding slack on entry signs and the sum).
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    coefficients: Vec<f64>,
}

impl Mixture {
    pub fn new(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::InvalidOrder {
                order: 0,
                max: MAX_ORDER,
            });
        }
        for (index, &value) in coefficients.iter().enumerate() {
            if !(value >= MIXTURE_SIGN_TOL) {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        let sum: f64 = coefficients.iter().sum();
        if !((sum - 1.0).abs() <= MIXTURE_SUM_TOL) {
            return Err(Error::NotNormalized {
                sum,
                tol: MIXTURE_SUM_TOL,
            });
        }
        Ok(Self { coefficients })
    }

    /// The uniform mixture `(1/m, ..., 1/m)`.
    pub fn uniform(order: usize) -> Self {
        assert!(order >= 1, "mixture order must be at least 1");
        Self {
            coefficients: vec![1.0 / order as f64; order],
        }
    }

    /// The vertex indicator `e_i` (0-based).
    pub fn vertex(order: usize, index: usize) -> Self {
        assert!(index < order, "vertex index out of range");
        let mut coefficients = vec![0.0; order];
        coefficients[index] = 1.0;
        Self { coefficients }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coefficients
    }
}

/// Polytope vertex `v_i` of order `m` as a full window of half-width `m`:
/// weight `1 / (2 i)` at offsets `1 <= |k| <= i`, zero elsewhere.
/// Vertex indices are 1-based.
pub fn vertex(index: usize, order: usize) -> Result<Vec<f64>> {
    if order < 1 || order > MAX_ORDER {
        return Err(Error::InvalidOrder {
            order,
            max: MAX_ORDER,
        });
    }
    if index < 1 || index > order {
        return Err(Error::VertexIndexOutOfRange { index, order });
    }
    let mut weights = vec![0.0; 2 * order + 1];
    let value = 1.0 / (2 * index) as f64;
    for offset in 1..=index {
        weights[order + offset] = value;
        weights[order - offset] = value;
    }
    Ok(weights)
}

/// The vertex columns of one polytope, embedded in windows of a possibly
/// larger half-width, together with their complements against the identity
/// window (weight 1 at the centre). The complement columns are what turn the
/// smoothing loss into a pure quadratic form over the simplex.
#[derive(Debug, Clone)]
pub struct VertexMatrix {
    order: usize,
    half_width: usize,
    columns: Vec<Vec<f64>>,
    complement_columns: Vec<Vec<f64>>,
}

impl VertexMatrix {
    /// Vertices of order `m` as windows of half-width `m`.
    pub fn new(order: usize) -> Result<Self> {
        Self::embedded(order, order)
    }

    /// Vertices of order `m` embedded in windows of half-width `K >= m`: the
    /// outer `K - m` offsets stay zero on every column.
    pub fn embedded(order: usize, half_width: usize) -> Result<Self> {
        if order < 1 || order > MAX_ORDER {
            return Err(Error::InvalidOrder {
                order,
                max: MAX_ORDER,
            });
        }
        if half_width < order || half_width > MAX_ORDER {
            return Err(Error::InvalidOrder {
                order: half_width,
                max: MAX_ORDER,
            });
        }
        let rows = 2 * half_width + 1;
        let mut columns = Vec::with_capacity(order);
        let mut complement_columns = Vec::with_capacity(order);
        for index in 1..=order {
            let value = 1.0 / (2 * index) as f64;
            let mut column = vec![0.0; rows];
            let mut complement = vec![0.0; rows];
            complement[half_width] = 1.0;
            for offset in 1..=index {
                column[half_width + offset] = value;
                column[half_width - offset] = value;
                complement[half_width + offset] = -value;
                complement[half_width - offset] = -value;
            }
            columns.push(column);
            complement_columns.push(complement);
        }
        Ok(Self {
            order,
            half_width,
            columns,
            complement_columns,
        })
    }

    /// Number of vertices `m`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// Half-width `K` of the embedding windows.
    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Window length `2K + 1`.
    pub fn rows(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Vertex window for 1-based index `i`.
    pub fn column(&self, index: usize) -> &[f64] {
        &self.columns[index - 1]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Complement column `v_0 - v_i` (identity window minus vertex `i`),
    /// 1-based.
    pub fn complement_column(&self, index: usize) -> &[f64] {
        &self.complement_columns[index - 1]
    }

    pub fn complement_columns(&self) -> &[Vec<f64>] {
        &self.complement_columns
    }

    /// Raw linear combination of the vertex columns with arbitrary (possibly
    /// infeasible) coefficients. Only the length is checked.
    pub fn combine(&self, coefficients: &[f64]) -> Result<Vec<f64>> {
        if coefficients.len() != self.order {
            return Err(Error::LengthMismatch {
                expected: self.order,
                got: coefficients.len(),
            });
        }
        let mut weights = vec![0.0; self.rows()];
        for (coefficient, column) in coefficients.iter().zip(&self.columns) {
            for (w, c) in weights.iter_mut().zip(column) {
                *w += coefficient * c;
            }
        }
        Ok(weights)
    }
}

/// Maps mixture coefficients to the window they define. The result always
/// passes validation; a failure here would indicate a bug, not bad input.
pub fn window_from_mixture(mixture: &Mixture, vertices: &VertexMatrix) -> Result<Window> {
    if mixture.order() != vertices.order() {
        return Err(Error::LengthMismatch {
            expected: vertices.order(),
            got: mixture.order(),
        });
    }
    let weights = vertices.combine(mixture.as_slice())?;
    Ok(Window::with_tol(weights, VALIDATE_TOL)?)
}

/// Recovers the unique mixture representing a valid window:
/// `p[i] = 2 i * (w[i] - w[i + 1])`, reading the one-sided weights with a
/// trailing zero. The window's own half-width sets the mixture order.
pub fn mixture_from_window(window: &Window) -> Result<Mixture> {
    let k = window.half_width();
    let w = window.weights();
    let mut coefficients = Vec::with_capacity(k);
    for i in 1..=k {
        let here = w[k + i];
        let next = if i == k { 0.0 } else { w[k + i + 1] };
        coefficients.push((2 * i) as f64 * (here - next));
    }
    // A valid window can still round to coefficients a hair outside the
    // simplex; clamp the noise rather than reject.
    for c in coefficients.iter_mut() {
        if *c < 0.0 && *c >= MIXTURE_SIGN_TOL {
            *c = 0.0;
        }
    }
    Mixture::new(coefficients)
}

/// The identity window of half-width `K`: weight 1 at the centre. Not a
/// member of the tapered class (its centre weight is not zero) but the
/// natural reference point: it reproduces the signal with zero loss.
pub fn identity_window(half_width: usize) -> Vec<f64> {
    let mut weights = vec![0.0; 2 * half_width + 1];
    weights[half_width] = 1.0;
    weights
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn vertex_examples() {
        assert_eq!(vertex(1, 1).unwrap(), vec![0.5, 0.0, 0.5]);
        assert_eq!(vertex(1, 2).unwrap(), vec![0.0, 0.5, 0.0, 0.5, 0.0]);
        assert_eq!(
            vertex(2, 2).unwrap(),
            vec![0.25, 0.25, 0.0, 0.25, 0.25]
        );
    }

    #[test]
    fn vertex_index_and_order_errors() {
        assert!(matches!(
            vertex(0, 2),
            Err(Error::VertexIndexOutOfRange { index: 0, order: 2 })
        ));
        assert!(matches!(
            vertex(3, 2),
            Err(Error::VertexIndexOutOfRange { index: 3, order: 2 })
        ));
        assert!(matches!(vertex(1, 0), Err(Error::InvalidOrder { .. })));
    }

    #[test]
    fn vertices_are_valid_windows_with_unit_sum() {
        for order in 1..=12 {
            let vm = VertexMatrix::new(order).unwrap();
            for i in 1..=order {
                let column = vm.column(i);
                validate_window(column, 1e-12).unwrap();
                let sum: f64 = column.iter().sum();
                assert!((sum - 1.0).abs() <= 1e-14, "order {order} vertex {i}");
            }
        }
    }

    #[test]
    fn vertex_column_sums_are_exact_rationals() {
        use num_rational::BigRational;
        use num_bigint::BigInt;
        for order in 1..=12usize {
            for i in 1..=order {
                // 2i copies of 1/(2i) sum to exactly 1 in exact arithmetic.
                let value = BigRational::new(BigInt::from(1), BigInt::from(2 * i));
                let sum: BigRational = (0..2 * i).map(|_| value.clone()).sum();
                assert_eq!(sum, BigRational::from(BigInt::from(1)));
            }
        }
    }

    #[test]
    fn embedded_matrix_pads_with_zeros() {
        let vm = VertexMatrix::embedded(2, 3).unwrap();
        assert_eq!(vm.rows(), 7);
        assert_eq!(vm.column(1), &[0.0, 0.0, 0.5, 0.0, 0.5, 0.0, 0.0]);
        assert_eq!(
            vm.column(2),
            &[0.0, 0.25, 0.25, 0.0, 0.25, 0.25, 0.0]
        );
        assert!(VertexMatrix::embedded(3, 2).is_err());
    }

    #[test]
    fn complement_columns_subtract_from_identity() {
        let vm = VertexMatrix::new(2).unwrap();
        assert_eq!(
            vm.complement_column(1),
            &[0.0, -0.5, 1.0, -0.5, 0.0]
        );
        let identity = identity_window(vm.half_width());
        for i in 1..=vm.order() {
            for ((c, v), id) in vm
                .complement_column(i)
                .iter()
                .zip(vm.column(i))
                .zip(&identity)
            {
                assert_eq!(*c, id - v);
            }
        }
    }

    #[test]
    fn window_from_mixture_examples() {
        let vm = VertexMatrix::new(2).unwrap();
        let w = window_from_mixture(&Mixture::new(vec![1.0, 0.0]).unwrap(), &vm).unwrap();
        assert_eq!(w.weights(), &[0.0, 0.5, 0.0, 0.5, 0.0]);
        let w = window_from_mixture(&Mixture::new(vec![0.5, 0.5]).unwrap(), &vm).unwrap();
        assert_eq!(w.weights(), &[0.125, 0.375, 0.0, 0.375, 0.125]);
        let uniform = window_from_mixture(&Mixture::uniform(2), &vm).unwrap();
        assert_eq!(uniform.weights(), &[0.125, 0.375, 0.0, 0.375, 0.125]);
    }

    #[test]
    fn mixture_from_window_examples() {
        let w = Window::new(vec![0.0, 0.5, 0.0, 0.5, 0.0]).unwrap();
        assert_eq!(mixture_from_window(&w).unwrap().as_slice(), &[1.0, 0.0]);
        let w = Window::new(vec![0.125, 0.375, 0.0, 0.375, 0.125]).unwrap();
        assert_eq!(mixture_from_window(&w).unwrap().as_slice(), &[0.5, 0.5]);
        let w = Window::new(vec![0.25, 0.25, 0.0, 0.25, 0.25]).unwrap();
        assert_eq!(mixture_from_window(&w).unwrap().as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn validate_window_reports_first_violation() {
        validate_window(&[0.0, 0.5, 0.0, 0.5, 0.0], 1e-9).unwrap();
        assert!(matches!(
            validate_window(&[0.5, 0.5], 1e-9),
            Err(WindowViolation::BadLength(2))
        ));
        assert!(matches!(
            validate_window(&[0.0, 0.4, 0.2, 0.4, 0.0], 1e-9),
            Err(WindowViolation::CentreNonzero(_))
        ));
        // The mismatched pair sits two steps from the centre.
        assert!(matches!(
            validate_window(&[0.1, 0.4, 0.0, 0.4, 0.1 + 1e-6], 1e-9),
            Err(WindowViolation::Asymmetric { offset: 2, .. })
        ));
        // Inner weight strictly below the outer one violates tapering.
        assert!(matches!(
            validate_window(&[0.3, 0.2, 0.0, 0.2, 0.3], 1e-9),
            Err(WindowViolation::NotTapering { near: 1, far: 2, .. })
        ));
        assert!(matches!(
            validate_window(&[-0.25, 0.75, 0.0, 0.75, -0.25], 1e-9),
            Err(WindowViolation::NegativeWeight { .. })
        ));
        assert!(matches!(
            validate_window(&[0.0, 0.4, 0.0, 0.4, 0.0], 1e-9),
            Err(WindowViolation::SumNotOne { .. })
        ));
    }

    #[test]
    fn mixture_validation() {
        assert!(Mixture::new(vec![0.5, 0.5]).is_ok());
        assert!(Mixture::new(vec![1.0 + 5e-10, -5e-13]).is_ok());
        assert!(matches!(
            Mixture::new(vec![1.1, -0.1]),
            Err(Error::NegativeEntry { index: 1, .. })
        ));
        assert!(matches!(
            Mixture::new(vec![0.5, 0.4]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            Mixture::new(vec![0.5, f64::NAN]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn round_trip_mixture_window_mixture() {
        let mut rng = ChaCha8Rng::seed_from_u64(301);
        for order in 1..=8usize {
            let vm = VertexMatrix::new(order).unwrap();
            for _ in 0..50 {
                let mut p: Vec<f64> = (0..order).map(|_| rng.random::<f64>()).collect();
                let sum: f64 = p.iter().sum();
                p.iter_mut().for_each(|v| *v /= sum);
                let mixture = Mixture::new(p.clone()).unwrap();
                let window = window_from_mixture(&mixture, &vm).unwrap();
                let back = mixture_from_window(&window).unwrap();
                for (a, b) in back.as_slice().iter().zip(&p) {
                    assert!((a - b).abs() <= 1e-12, "order {order}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn random_valid_windows_lie_in_the_vertex_span() {
        let mut rng = ChaCha8Rng::seed_from_u64(302);
        for _ in 0..100 {
            let k = 1 + (rng.random::<f64>() * 6.0) as usize;
            // Build a valid window from sorted one-sided weights.
            let mut side: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
            side.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let sum: f64 = 2.0 * side.iter().sum::<f64>();
            side.iter_mut().for_each(|v| *v /= sum);
            let mut weights = vec![0.0; 2 * k + 1];
            for (i, v) in side.iter().enumerate() {
                weights[k + 1 + i] = *v;
                weights[k - 1 - i] = *v;
            }
            let window = Window::new(weights).unwrap();
            let mixture = mixture_from_window(&window).unwrap();
            // Mixture::new has already confirmed simplex membership; check
            // that the mixture reproduces the window exactly.
            let vm = VertexMatrix::new(k).unwrap();
            let rebuilt = window_from_mixture(&mixture, &vm).unwrap();
            for (a, b) in rebuilt.weights().iter().zip(window.weights()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn mixture_from_window_respects_window_order() {
        // Half-width 3 window supported only on the inner two offsets.
        let w = Window::new(vec![0.0, 0.125, 0.375, 0.0, 0.375, 0.125, 0.0]).unwrap();
        let p = mixture_from_window(&w).unwrap();
        assert_eq!(p.order(), 3);
        assert_eq!(p.as_slice(), &[0.5, 0.5, 0.0]);
    }
}
