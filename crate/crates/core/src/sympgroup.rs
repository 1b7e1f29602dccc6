// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! The metric, the symplectic form and the groups acting on phase space.
//!
//! Phase-space vectors are rows ordered `(p_0..p_{n-1} | x_0..x_{n-1})` and a
//! linear canonical transformation acts on the right, `v' = v·M`. A matrix `M`
//! belongs to the pseudo-symplectic group when `MᵀJM = J` with
//! `J = [[0, η], [−η, 0]]`. In block form
//!
//! ```text
//! M = [ 𝔸            (ℓ²/ħ)·ℂ ]
//!     [ (ħ/L²)·𝔹     𝔻        ]
//! ```
//!
//! with dimensionless `𝔸, 𝔹, ℂ, 𝔻`.

use serde::{Deserialize, Serialize};

use crate::error::{QpsError, Result};
use crate::numerics::{self, frobenius, Matrix, RngStream};
use crate::qpstate::ScaleConfig;

/// Default relative tolerance for `‖MᵀJM − J‖_F / ‖J‖_F`.
pub const TOL_MEMBERSHIP: f64 = 1e-10;
/// Default tolerance for `|det − 1|`.
pub const TOL_DETERMINANT: f64 = 1e-9;
/// Default tolerance for `‖SᵀJ + JS‖_F` on algebra elements.
pub const TOL_ALGEBRA: f64 = 1e-10;
/// Largest generator Frobenius norm accepted by [`exp_to_group`].
pub const MAX_GENERATOR_NORM: f64 = 4.0;
/// Default entry scale of random generators.
pub const DEFAULT_GENERATOR_SCALE: f64 = 0.3;
/// Upper bound on `n` accepted from external input.
pub const MAX_DIMENSION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    n_plus: usize,
    n_minus: usize,
}

impl Signature {
    pub fn new(n_plus: usize, n_minus: usize) -> Result<Self> {
        let n = n_plus
            .checked_add(n_minus)
            .ok_or_else(|| QpsError::InvalidSignature("dimension overflows".into()))?;
        if n == 0 {
            return Err(QpsError::InvalidSignature(
                "dimension must be at least 1".into(),
            ));
        }
        if n > MAX_DIMENSION {
            return Err(QpsError::InvalidSignature(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIMENSION}"
            )));
        }
        Ok(Signature { n_plus, n_minus })
    }

    /// Signature (1,4).
    pub fn de_sitter() -> Self {
        Signature {
            n_plus: 1,
            n_minus: 4,
        }
    }

    pub fn n_plus(&self) -> usize {
        self.n_plus
    }

    pub fn n_minus(&self) -> usize {
        self.n_minus
    }

    pub fn n(&self) -> usize {
        self.n_plus + self.n_minus
    }

    /// Phase-space dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n()
    }
}

impl Default for Signature {
    fn default() -> Self {
        Signature::de_sitter()
    }
}

/// Diagonal metric `η` with `n_plus` entries `+1` followed by `n_minus` entries `−1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    diag: Vec<f64>,
}

impl Metric {
    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_diagonal(&numerics::Vector::from_column_slice(&self.diag))
    }

    /// `Σ_μ η_μμ u_μ v_μ`.
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        if u.len() != self.n() || v.len() != self.n() {
            return Err(QpsError::DimensionMismatch(format!(
                "metric of dimension {} applied to vectors of length {} and {}",
                self.n(),
                u.len(),
                v.len()
            )));
        }
        Ok(self
            .diag
            .iter()
            .zip(u.iter().zip(v))
            .map(|(e, (a, b))| e * a * b)
            .sum())
    }
}

pub fn build_metric(sig: Signature) -> Metric {
    let mut diag = vec![1.0; sig.n_plus];
    diag.extend(std::iter::repeat_n(-1.0, sig.n_minus));
    Metric { diag }
}

/// `J = [[0, η], [−η, 0]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    j: Matrix,
}

impl SymplecticForm {
    pub fn matrix(&self) -> &Matrix {
        &self.j
    }
}

pub fn build_symplectic_form(sig: Signature) -> SymplecticForm {
    let n = sig.n();
    let eta = build_metric(sig);
    let mut j = Matrix::zeros(2 * n, 2 * n);
    for (i, &e) in eta.diag().iter().enumerate() {
        j[(i, n + i)] = e;
        j[(n + i, i)] = -e;
    }
    SymplecticForm { j }
}

fn check_phase_dim(sig: Signature, m: &Matrix) -> Result<()> {
    let d = sig.dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(QpsError::DimensionMismatch(format!(
            "expected a {d}x{d} matrix for signature ({},{}), got {}x{}",
            sig.n_plus,
            sig.n_minus,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Relative deviation `‖MᵀJM − J‖_F / ‖J‖_F`.
pub fn symplectic_deviation(sig: Signature, m: &Matrix) -> Result<f64> {
    check_phase_dim(sig, m)?;
    let form = build_symplectic_form(sig);
    let j = form.matrix();
    Ok(frobenius(&(m.transpose() * j * m - j)) / frobenius(j))
}

pub fn is_symplectic(sig: Signature, m: &Matrix, tol: f64) -> Result<(bool, f64)> {
    let deviation = symplectic_deviation(sig, m)?;
    Ok((deviation <= tol, deviation))
}

/// An element of the pseudo-symplectic group `Sp(2N₊, 2N₋)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LctMatrix {
    sig: Signature,
    m: Matrix,
    deviation: f64,
}

impl LctMatrix {
    pub fn new(sig: Signature, m: Matrix) -> Result<Self> {
        Self::with_tolerance(sig, m, TOL_MEMBERSHIP)
    }

    /// Validates membership at `tol` and unimodularity at [`TOL_DETERMINANT`].
    pub fn with_tolerance(sig: Signature, m: Matrix, tol: f64) -> Result<Self> {
        if !numerics::all_finite(&m) {
            return Err(QpsError::NonFinite(
                "LCT matrix has non-finite entries".into(),
            ));
        }
        let deviation = symplectic_deviation(sig, &m)?;
        // written as a negation so NaN deviations are rejected too
        if !(deviation <= tol) {
            return Err(QpsError::NotSymplectic {
                deviation,
                tolerance: tol,
            });
        }
        let det = numerics::determinant(&m)?;
        if !((det - 1.0).abs() <= TOL_DETERMINANT) {
            return Err(QpsError::NotSymplectic {
                deviation: (det - 1.0).abs(),
                tolerance: TOL_DETERMINANT,
            });
        }
        Ok(LctMatrix { sig, m, deviation })
    }

    pub fn identity(sig: Signature) -> Self {
        let d = sig.dim();
        LctMatrix {
            sig,
            m: Matrix::identity(d, d),
            deviation: 0.0,
        }
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn into_matrix(self) -> Matrix {
        self.m
    }

    /// Membership deviation measured at construction.
    pub fn deviation(&self) -> f64 {
        self.deviation
    }

    pub fn determinant(&self) -> f64 {
        self.m.clone().lu().determinant()
    }

    /// `M⁻¹ = −J Mᵀ J`, exact for group elements.
    pub fn inverse(&self) -> LctMatrix {
        let form = build_symplectic_form(self.sig);
        let j = form.matrix();
        let inv = -(j * self.m.transpose() * j);
        LctMatrix {
            sig: self.sig,
            m: inv,
            deviation: self.deviation,
        }
    }

    pub fn to_json_value(&self, scales: &ScaleConfig) -> serde_json::Value {
        serde_json::to_value(LctFile::from_lct(self, scales)).expect("LCT file serializes")
    }

    pub fn to_json_string(&self, scales: &ScaleConfig) -> String {
        serde_json::to_string_pretty(&LctFile::from_lct(self, scales)).expect("LCT file serializes")
    }

    /// Parses and validates an LCT JSON document.
    pub fn from_json_str(text: &str) -> Result<(ScaleConfig, LctMatrix)> {
        let file: LctFile =
            serde_json::from_str(text).map_err(|e| QpsError::Parse(e.to_string()))?;
        file.into_lct()
    }
}

/// On-disk form: `{"n_plus", "n_minus", "hbar", "ell", "L", "m"}` with `m` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LctFile {
    pub n_plus: usize,
    pub n_minus: usize,
    pub hbar: f64,
    pub ell: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub m: Vec<Vec<f64>>,
}

pub(crate) fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>], dim: usize, what: &str) -> Result<Matrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(QpsError::DimensionMismatch(format!(
            "{what} must be {dim}x{dim} row-major"
        )));
    }
    Ok(Matrix::from_fn(dim, dim, |i, j| rows[i][j]))
}

impl LctFile {
    pub fn from_lct(lct: &LctMatrix, scales: &ScaleConfig) -> Self {
        LctFile {
            n_plus: lct.sig.n_plus,
            n_minus: lct.sig.n_minus,
            hbar: scales.hbar(),
            ell: scales.ell(),
            big_l: scales.big_l(),
            m: rows_of(&lct.m),
        }
    }

    pub fn into_lct(self) -> Result<(ScaleConfig, LctMatrix)> {
        let sig = Signature::new(self.n_plus, self.n_minus)?;
        let scales = ScaleConfig::new(self.hbar, self.ell, self.big_l)?;
        let m = matrix_from_rows(&self.m, sig.dim(), "LCT matrix")?;
        Ok((scales, LctMatrix::new(sig, m)?))
    }
}

/// `‖SᵀJ + JS‖_F`.
pub fn algebra_deviation(sig: Signature, s: &Matrix) -> Result<f64> {
    check_phase_dim(sig, s)?;
    let form = build_symplectic_form(sig);
    let j = form.matrix();
    Ok(frobenius(&(s.transpose() * j + j * s)))
}

fn require_positive_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(QpsError::InvalidArgument(format!(
            "generator scale must be positive and finite, got {scale}"
        )));
    }
    Ok(())
}

/// Random algebra element `S = J·K` with `K` symmetric, entries uniform in
/// `[−scale, scale]` (upper triangle drawn row by row, then mirrored).
pub fn random_sp_generator(sig: Signature, stream: &mut RngStream, scale: f64) -> Result<Matrix> {
    require_positive_scale(scale)?;
    let d = sig.dim();
    let mut k = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = stream.next_symmetric(scale);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(build_symplectic_form(sig).matrix() * k)
}

/// `M = exp(S)` for an algebra element `S`.
pub fn exp_to_group(sig: Signature, s: &Matrix) -> Result<LctMatrix> {
    let deviation = algebra_deviation(sig, s)?;
    let norm = frobenius(s);
    if !(norm <= MAX_GENERATOR_NORM) {
        return Err(QpsError::NormTooLarge {
            norm,
            limit: MAX_GENERATOR_NORM,
        });
    }
    if !(deviation <= TOL_ALGEBRA) {
        return Err(QpsError::NotInAlgebra {
            deviation,
            tolerance: TOL_ALGEBRA,
        });
    }
    LctMatrix::new(sig, numerics::expm(s)?)
}

/// Convenience: a random group element from `random_sp_generator`.
pub fn random_lct(sig: Signature, stream: &mut RngStream, scale: f64) -> Result<LctMatrix> {
    let s = random_sp_generator(sig, stream, scale)?;
    exp_to_group(sig, &s)
}

/// `M1·M2`; membership is re-checked at twice the summed input deviations
/// plus a rounding allowance.
pub fn compose_lct(m1: &LctMatrix, m2: &LctMatrix) -> Result<LctMatrix> {
    if m1.sig != m2.sig {
        return Err(QpsError::DimensionMismatch(
            "cannot compose LCTs of different signatures".into(),
        ));
    }
    let tol = (2.0 * (m1.deviation + m2.deviation) + 1e-12).max(TOL_MEMBERSHIP);
    LctMatrix::with_tolerance(m1.sig, &m1.m * &m2.m, tol)
}

/// Dimensionless blocks of an LCT matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LctBlocks {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

pub fn decompose_blocks(lct: &LctMatrix, scales: &ScaleConfig) -> LctBlocks {
    let n = lct.sig.n();
    let m = &lct.m;
    let upper_right = m.view((0, n), (n, n)).into_owned();
    let lower_left = m.view((n, 0), (n, n)).into_owned();
    LctBlocks {
        a: m.view((0, 0), (n, n)).into_owned(),
        b: lower_left * (scales.big_l().powi(2) / scales.hbar()),
        c: upper_right * (scales.hbar() / scales.ell().powi(2)),
        d: m.view((n, n), (n, n)).into_owned(),
    }
}

/// Fourier-type LCT `[[0, −c⁻¹I], [cI, 0]]`: `(p | x) ↦ (c·x | −p/c)`.
pub fn fourier_lct(sig: Signature, c: f64) -> Result<LctMatrix> {
    if c == 0.0 || !c.is_finite() {
        return Err(QpsError::ZeroScale);
    }
    let n = sig.n();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        m[(i, n + i)] = -1.0 / c;
        m[(n + i, i)] = c;
    }
    LctMatrix::new(sig, m)
}

/// An element of the identity component of `SO(N₊, N₋)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeSitterMatrix {
    sig: Signature,
    a: Matrix,
}

/// `‖AᵀηA − η‖_F`.
pub fn de_sitter_deviation(sig: Signature, a: &Matrix) -> Result<f64> {
    let n = sig.n();
    if a.nrows() != n || a.ncols() != n {
        return Err(QpsError::DimensionMismatch(format!(
            "expected a {n}x{n} matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let eta = build_metric(sig).matrix();
    Ok(frobenius(&(a.transpose() * &eta * a - &eta)))
}

impl DeSitterMatrix {
    pub fn new(sig: Signature, a: Matrix) -> Result<Self> {
        Self::with_tolerance(sig, a, TOL_MEMBERSHIP)
    }

    pub fn with_tolerance(sig: Signature, a: Matrix, tol: f64) -> Result<Self> {
        let deviation = de_sitter_deviation(sig, &a)?;
        if !(deviation <= tol) {
            return Err(QpsError::NotDeSitter {
                deviation,
                tolerance: tol,
            });
        }
        let det = numerics::determinant(&a)?;
        if !((det - 1.0).abs() <= TOL_DETERMINANT) {
            return Err(QpsError::NotDeSitter {
                deviation: (det - 1.0).abs(),
                tolerance: TOL_DETERMINANT,
            });
        }
        Ok(DeSitterMatrix { sig, a })
    }

    pub fn identity(sig: Signature) -> Self {
        let n = sig.n();
        DeSitterMatrix {
            sig,
            a: Matrix::identity(n, n),
        }
    }

    /// Hyperbolic rotation mixing axis 0 and the last axis with rapidity `chi`.
    ///
    /// Built as `exp(η·W)` with `W[0][n−1] = chi = −W[n−1][0]`, which for
    /// signature `(1, N₋)` is the symmetric boost block
    /// `[[cosh χ, sinh χ], [sinh χ, cosh χ]]`.
    pub fn boost(sig: Signature, chi: f64) -> Result<Self> {
        let n = sig.n();
        if n < 2 {
            return Err(QpsError::InvalidSignature("a boost needs two axes".into()));
        }
        let mut w = Matrix::zeros(n, n);
        w[(0, n - 1)] = chi;
        w[(n - 1, 0)] = -chi;
        let omega = build_metric(sig).matrix() * w;
        Self::new(sig, numerics::expm(&omega)?)
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn matrix(&self) -> &Matrix {
        &self.a
    }

    /// `𝕄 = A⁻¹ = η Aᵀ η`.
    pub fn inverse_matrix(&self) -> Matrix {
        let eta = build_metric(self.sig).matrix();
        &eta * self.a.transpose() * &eta
    }
}

/// `A = exp(η·W)` with `W` antisymmetric, entries uniform in `[−scale, scale]`.
pub fn random_de_sitter(
    sig: Signature,
    stream: &mut RngStream,
    scale: f64,
) -> Result<DeSitterMatrix> {
    require_positive_scale(scale)?;
    let n = sig.n();
    let mut w = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = stream.next_symmetric(scale);
            w[(i, j)] = v;
            w[(j, i)] = -v;
        }
    }
    let omega = build_metric(sig).matrix() * w;
    DeSitterMatrix::new(sig, numerics::expm(&omega)?)
}

/// `block-diag(A, A)`.
pub fn embed_de_sitter(a: &DeSitterMatrix) -> Result<LctMatrix> {
    let n = a.sig.n();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a.a);
    m.view_mut((n, n), (n, n)).copy_from(&a.a);
    LctMatrix::new(a.sig, m)
}
