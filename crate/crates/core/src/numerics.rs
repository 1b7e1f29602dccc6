// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense real matrix kernel.
//!
//! Storage and BLAS-style products come from `nalgebra`; this module adds the
//! pieces whose numerical contract matters to the rest of the crate: a pivot
//! guarded linear solve, a scaling-and-squaring matrix exponential, a log-log
//! regression for convergence orders, and a reproducible random stream.

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{QpsError, Result};

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Relative pivot floor: a pivot is singular when `|u_ii| <= PIVOT_FLOOR * max|A|`.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Target 1-norm of the scaled argument in [`expm`].
pub const EXPM_SCALED_NORM: f64 = 0.5;

const EXPM_TAYLOR_DEGREE: usize = 18;

/// Result of one numerical check: the measured error against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// A NaN measurement never passes.
    pub fn new(name: impl Into<String>, max_error: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            max_error,
            tolerance,
            pass: max_error <= tolerance,
        }
    }
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Maximum absolute column sum.
pub fn norm_one(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &Matrix) -> f64 {
    a.norm()
}

pub fn all_finite(a: &Matrix) -> bool {
    a.iter().all(|v| v.is_finite())
}

fn require_square(a: &Matrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() || a.nrows() == 0 {
        return Err(QpsError::DimensionMismatch(format!(
            "{what} must be square and non-empty, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

/// LU factorization with partial pivoting plus the pivot diagnostics used
/// for singularity detection and the condition estimate.
pub struct Factorization {
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    cond: f64,
}

impl Factorization {
    pub fn new(a: &Matrix) -> Result<Self> {
        Self::with_floor(a, PIVOT_FLOOR)
    }

    pub fn with_floor(a: &Matrix, relative_floor: f64) -> Result<Self> {
        require_square(a, "coefficient matrix")?;
        if !all_finite(a) {
            return Err(QpsError::NonFinite("coefficient matrix".into()));
        }
        let floor = relative_floor * max_abs(a);
        let lu = a.clone().lu();
        let u = lu.u();
        let mut max_pivot = 0.0_f64;
        let mut min_pivot = f64::INFINITY;
        for (i, p) in u.diagonal().iter().enumerate() {
            let magnitude = p.abs();
            if magnitude <= floor {
                return Err(QpsError::SingularMatrix {
                    pivot: i,
                    magnitude,
                    floor,
                });
            }
            max_pivot = max_pivot.max(magnitude);
            min_pivot = min_pivot.min(magnitude);
        }
        Ok(Factorization {
            lu,
            cond: max_pivot / min_pivot,
        })
    }

    /// max|pivot| / min|pivot|.
    pub fn cond_estimate(&self) -> f64 {
        self.cond
    }

    pub fn determinant(&self) -> f64 {
        self.lu.determinant()
    }

    pub fn solve(&self, b: &Matrix) -> Result<Matrix> {
        if b.nrows() != self.lu.u().nrows() {
            return Err(QpsError::DimensionMismatch(format!(
                "right-hand side has {} rows, expected {}",
                b.nrows(),
                self.lu.u().nrows()
            )));
        }
        let y = self
            .lu
            .solve(b)
            .ok_or_else(|| QpsError::NonFinite("triangular solve failed".into()))?;
        if !all_finite(&y) {
            return Err(QpsError::NonFinite("solution overflowed".into()));
        }
        Ok(y)
    }
}

/// Solves `A·Y = B` by LU with partial pivoting.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    Factorization::new(a)?.solve(b)
}

/// Explicit inverse, computed as `solve(A, I)`.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = require_square(a, "matrix")?;
    solve(a, &Matrix::identity(n, n))
}

pub fn cond_estimate(a: &Matrix) -> Result<f64> {
    Ok(Factorization::new(a)?.cond_estimate())
}

/// Determinant via LU; zero for singular input.
pub fn determinant(a: &Matrix) -> Result<f64> {
    require_square(a, "matrix")?;
    Ok(a.clone().lu().determinant())
}

/// `‖A − Aᵀ‖_F ≤ rel_tol·‖A‖_F`.
pub fn is_symmetric(a: &Matrix, rel_tol: f64) -> bool {
    a.nrows() == a.ncols() && frobenius(&(a - a.transpose())) <= rel_tol * frobenius(a)
}

/// True when a Cholesky factorization of the (symmetric) matrix succeeds.
pub fn is_positive_definite(a: &Matrix) -> bool {
    a.nrows() == a.ncols() && all_finite(a) && a.clone().cholesky().is_some()
}

/// Matrix exponential by scaling and squaring.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most
/// [`EXPM_SCALED_NORM`], exponentiated with a degree-18 Taylor polynomial in
/// Horner form (truncation below 1e-22 at that norm), then squared `s` times.
pub fn expm(s: &Matrix) -> Result<Matrix> {
    let n = require_square(s, "exponent")?;
    if !all_finite(s) {
        return Err(QpsError::NonFinite(
            "exponent has non-finite entries".into(),
        ));
    }
    let norm = norm_one(s);
    let mut squarings = 0_i32;
    if norm > EXPM_SCALED_NORM {
        squarings = (norm / EXPM_SCALED_NORM).log2().ceil() as i32;
        // log2 rounding can leave the scaled norm a hair above the target
        while norm / 2f64.powi(squarings) > EXPM_SCALED_NORM {
            squarings += 1;
        }
    }
    let scaled = s / 2f64.powi(squarings);

    let identity = Matrix::identity(n, n);
    let mut acc = identity.clone();
    for k in (1..=EXPM_TAYLOR_DEGREE).rev() {
        acc = &identity + (&scaled * &acc) / k as f64;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
        if !all_finite(&acc) {
            return Err(QpsError::NonFinite(format!(
                "matrix exponential overflowed (1-norm {norm:e})"
            )));
        }
    }
    Ok(acc)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub max_abs_residual: f64,
}

pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 2 {
        return Err(QpsError::InsufficientPoints(points.len()));
    }
    let mut logs = Vec::with_capacity(points.len());
    for (index, &(x, y)) in points.iter().enumerate() {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(QpsError::NonPositiveValue { index });
        }
        logs.push((x.ln(), y.ln()));
    }
    let count = logs.len() as f64;
    let mean_x = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let mean_y = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(QpsError::InvalidArgument(
            "log-log fit needs at least two distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let max_abs_residual = logs
        .iter()
        .map(|p| (p.1 - (intercept + slope * p.0)).abs())
        .fold(0.0, f64::max);
    Ok(FitResult {
        slope,
        intercept,
        max_abs_residual,
    })
}

/// Reproducible random stream.
///
/// The generator is ChaCha8. Its 256-bit key is four consecutive SplitMix64
/// outputs of `seed`, written little-endian; `stream_index` selects the ChaCha
/// stream (nonce). Uniform reals use the top 53 bits of each 64-bit word:
/// `u = (w >> 11) · 2⁻⁵³ ∈ [0, 1)`.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut state = seed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream_index);
        RngStream {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-half_width, half_width]`.
    pub fn next_symmetric(&mut self, half_width: f64) -> f64 {
        half_width * (2.0 * self.next_unit() - 1.0)
    }
}

/// `n` values uniform in `[-half_width, half_width]`.
pub fn rng_uniform_symmetric(
    stream: &mut RngStream,
    half_width: f64,
    n: usize,
) -> Result<Vec<f64>> {
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(QpsError::InvalidArgument(format!(
            "half width must be positive and finite, got {half_width}"
        )));
    }
    Ok((0..n).map(|_| stream.next_symmetric(half_width)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: usize, cols: usize, data: &[f64]) -> Matrix {
        Matrix::from_row_slice(rows, cols, data)
    }

    #[test]
    fn solve_identity() {
        let y = solve(&Matrix::identity(2, 2), &m(2, 1, &[3.0, 7.0])).unwrap();
        assert_eq!(y, m(2, 1, &[3.0, 7.0]));
    }

    #[test]
    fn solve_canonical_axis_block() {
        // 2x2 inverse formula, ad - b^2 = 1*4 - 3.75 = 0.25
        let q = 3.75_f64.sqrt();
        let a = m(2, 2, &[1.0, q, q, 4.0]);
        let y = solve(&a, &Matrix::identity(2, 2)).unwrap();
        let det = 0.25;
        let expected = m(2, 2, &[4.0 / det, -q / det, -q / det, 1.0 / det]);
        assert!((&y - &expected).norm() <= 1e-12 * expected.norm());
        assert_abs_diff_eq!(y[(0, 0)], 16.0, epsilon = 1e-12);
        assert_abs_diff_eq!(y[(0, 1)], -7.745967, epsilon = 1e-6);
    }

    #[test]
    fn solve_zero_matrix_is_singular() {
        let err = solve(&Matrix::zeros(2, 2), &Matrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, QpsError::SingularMatrix { pivot: 0, .. }));
    }

    #[test]
    fn solve_reports_failing_pivot() {
        let a = m(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        match solve(&a, &Matrix::identity(3, 3)) {
            Err(QpsError::SingularMatrix { pivot, .. }) => assert_eq!(pivot, 2),
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_shape_errors() {
        assert!(matches!(
            solve(&Matrix::identity(2, 3), &Matrix::identity(2, 2)),
            Err(QpsError::DimensionMismatch(_))
        ));
        assert!(matches!(
            solve(&Matrix::identity(2, 2), &Matrix::identity(3, 3)),
            Err(QpsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cond_estimate_from_pivots() {
        let a = m(2, 2, &[4.0, 0.0, 0.0, 0.5]);
        assert_eq!(cond_estimate(&a).unwrap(), 8.0);
    }

    #[test]
    fn expm_zero_is_identity() {
        assert_eq!(expm(&Matrix::zeros(3, 3)).unwrap(), Matrix::identity(3, 3));
    }

    #[test]
    fn expm_nilpotent() {
        let e = expm(&m(2, 2, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(e, m(2, 2, &[1.0, 1.0, 0.0, 1.0]));
    }

    fn series_exp(s: &Matrix, terms: usize) -> Matrix {
        let n = s.nrows();
        let mut term = Matrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..terms {
            term = &term * s / k as f64;
            sum += &term;
        }
        sum
    }

    #[test]
    fn expm_rotation_matches_closed_form_and_series() {
        #[allow(clippy::approx_constant)]
        let theta = 0.693147_f64;
        let s = m(2, 2, &[0.0, -theta, theta, 0.0]);
        let e = expm(&s).unwrap();
        let closed = m(2, 2, &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()]);
        assert!((&e - &closed).norm() <= 1e-14);
        assert!((&e - series_exp(&s, 30)).norm() <= 1e-14);
        assert_abs_diff_eq!(e[(0, 0)], 0.769239, epsilon = 1e-6);
        assert_abs_diff_eq!(e[(1, 0)], 0.638961, epsilon = 1e-6);
    }

    #[test]
    fn expm_large_norm_uses_squaring() {
        // diagonal, so the exact answer is elementwise exp
        let s = m(2, 2, &[3.0, 0.0, 0.0, -2.5]);
        let e = expm(&s).unwrap();
        assert!((e[(0, 0)] / 3f64.exp() - 1.0).abs() < 1e-14);
        assert!((e[(1, 1)] / (-2.5f64).exp() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn expm_overflow_is_reported() {
        let s = m(1, 1, &[1000.0]);
        assert!(matches!(expm(&s), Err(QpsError::NonFinite(_))));
        let nan = m(1, 1, &[f64::NAN]);
        assert!(matches!(expm(&nan), Err(QpsError::NonFinite(_))));
    }

    #[test]
    fn loglog_exact_power_laws() {
        let fit = loglog_fit(&[(1e-1, 4e-1), (1e-2, 4e-2), (1e-3, 4e-3)]).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 4f64.ln(), epsilon = 1e-12);
        let fit = loglog_fit(&[(1e-1, 1e-2), (1e-2, 1e-4)]).unwrap();
        assert_abs_diff_eq!(fit.slope, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn loglog_errors() {
        assert_eq!(
            loglog_fit(&[(1e-1, 1.0), (0.5, 0.0)]),
            Err(QpsError::NonPositiveValue { index: 1 })
        );
        assert_eq!(
            loglog_fit(&[(1.0, 1.0)]),
            Err(QpsError::InsufficientPoints(1))
        );
        assert!(loglog_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn rng_is_deterministic_per_stream() {
        let a = rng_uniform_symmetric(&mut RngStream::new(1, 0), 1.0, 3).unwrap();
        let b = rng_uniform_symmetric(&mut RngStream::new(1, 0), 1.0, 3).unwrap();
        assert_eq!(a, b);
        let c = rng_uniform_symmetric(&mut RngStream::new(1, 1), 1.0, 3).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rng_range_and_mean() {
        let v = rng_uniform_symmetric(&mut RngStream::new(9, 0), 0.5, 10_000).unwrap();
        assert!(v.iter().all(|x| (-0.5..=0.5).contains(x)));
        let v = rng_uniform_symmetric(&mut RngStream::new(5, 2), 1.0, 100_000).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn rng_rejects_bad_half_width() {
        assert!(rng_uniform_symmetric(&mut RngStream::new(1, 0), 0.0, 3).is_err());
        assert!(rng_uniform_symmetric(&mut RngStream::new(1, 0), -1.0, 3).is_err());
    }

    #[test]
    fn check_never_passes_nan() {
        assert!(!Check::new("x", f64::NAN, 1.0).pass);
        assert!(Check::new("x", 0.5, 1.0).pass);
    }
}
