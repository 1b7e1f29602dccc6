// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Gaussian phase-space states: means, covariance matrices and the scalar
//! invariant `Γ = v·Σ⁻¹·vᵀ`.
//!
//! A state is a mean row vector `v = (⟨p⟩ | ⟨x⟩)` and a covariance matrix
//! `Σ = [[P, Q], [Qᵀ, X]]`. Under an LCT `M` these move as `v' = v·M` and
//! `Σ' = MᵀΣM`, so `Γ` is unchanged for any invertible `M`.

pub mod gaussian;

use nalgebra::RowDVector;
use serde::{Deserialize, Serialize};

use crate::error::{QpsError, Result};
use crate::numerics::{self, frobenius, Factorization, Matrix, Vector};
use crate::sympgroup::{matrix_from_rows, rows_of, LctMatrix, Signature};

/// Largest accepted `(L/ℓ)²` in double precision.
pub const MAX_SCALE_RATIO_SQUARED: f64 = 1e12;
/// Relative symmetry tolerance for covariance matrices.
pub const TOL_SYMMETRY: f64 = 1e-12;

/// Physical scales `ħ`, `ℓ` (minimal length) and `L` (maximal length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleConfig {
    hbar: f64,
    ell: f64,
    big_l: f64,
}

impl ScaleConfig {
    pub fn new(hbar: f64, ell: f64, big_l: f64) -> Result<Self> {
        if !(hbar.is_finite() && ell.is_finite() && big_l.is_finite()) {
            return Err(QpsError::InvalidScales("scales must be finite".into()));
        }
        if !(hbar > 0.0) {
            return Err(QpsError::InvalidScales("hbar must be > 0".into()));
        }
        if !(ell > 0.0) {
            return Err(QpsError::InvalidScales("ell must be > 0".into()));
        }
        if big_l < ell {
            return Err(QpsError::InvalidScales("L must be ≥ ell".into()));
        }
        let ratio = (big_l / ell).powi(2);
        if ratio > MAX_SCALE_RATIO_SQUARED {
            return Err(QpsError::InvalidScales(format!(
                "(L/ell)^2 = {ratio:e} exceeds {MAX_SCALE_RATIO_SQUARED:e}; squared scale \
                 ratios beyond this lose all significant digits in double precision, so \
                 physical Planck/de Sitter values cannot be represented"
            )));
        }
        Ok(ScaleConfig { hbar, ell, big_l })
    }

    /// ħ = 1, ℓ = 0.5, L = 2.
    pub fn desk() -> Self {
        ScaleConfig {
            hbar: 1.0,
            ell: 0.5,
            big_l: 2.0,
        }
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn big_l(&self) -> f64 {
        self.big_l
    }

    /// `√(L² − ℓ²)`, evaluated as `√((L−ℓ)(L+ℓ))`.
    pub fn root(&self) -> f64 {
        ((self.big_l - self.ell) * (self.big_l + self.ell)).sqrt()
    }

    /// `ħ / 2ℓ`, the momentum curvature scale.
    pub fn momentum_scale(&self) -> f64 {
        self.hbar / (2.0 * self.ell)
    }

    /// `Γ* = L² / ℓ²`.
    pub fn gamma_target(&self) -> f64 {
        (self.big_l / self.ell).powi(2)
    }
}

impl Default for ScaleConfig {
    fn default() -> Self {
        ScaleConfig::desk()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMean {
    pub p: Vector,
    pub x: Vector,
}

impl PhaseMean {
    pub fn new(p: Vector, x: Vector) -> Result<Self> {
        if p.len() != x.len() {
            return Err(QpsError::DimensionMismatch(format!(
                "momentum mean has length {}, coordinate mean {}",
                p.len(),
                x.len()
            )));
        }
        if p.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return Err(QpsError::NonFinite("mean vector".into()));
        }
        Ok(PhaseMean { p, x })
    }

    pub fn zeros(n: usize) -> Self {
        PhaseMean {
            p: Vector::zeros(n),
            x: Vector::zeros(n),
        }
    }

    /// Combined row vector `(p | x)`.
    pub fn row(&self) -> RowDVector<f64> {
        let n = self.p.len();
        RowDVector::from_fn(2 * n, |_, j| if j < n { self.p[j] } else { self.x[j - n] })
    }

    pub fn from_row(row: &RowDVector<f64>) -> Self {
        let n = row.len() / 2;
        PhaseMean {
            p: Vector::from_fn(n, |i, _| row[i]),
            x: Vector::from_fn(n, |i, _| row[n + i]),
        }
    }
}

/// Symmetric positive-definite `2n×2n` covariance `[[P, Q], [Qᵀ, X]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    sigma: Matrix,
}

impl CovarianceMatrix {
    pub fn new(sigma: Matrix) -> Result<Self> {
        if sigma.nrows() != sigma.ncols() || !sigma.nrows().is_multiple_of(2) || sigma.nrows() == 0
        {
            return Err(QpsError::DimensionMismatch(format!(
                "covariance must be 2n x 2n, got {}x{}",
                sigma.nrows(),
                sigma.ncols()
            )));
        }
        if !numerics::all_finite(&sigma) {
            return Err(QpsError::NonFinite("covariance".into()));
        }
        if !numerics::is_symmetric(&sigma, TOL_SYMMETRY) {
            return Err(QpsError::InvalidState("covariance is not symmetric".into()));
        }
        if !numerics::is_positive_definite(&sigma) {
            return Err(QpsError::InvalidState(
                "covariance is not positive definite".into(),
            ));
        }
        Ok(CovarianceMatrix { sigma })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.sigma
    }

    fn half(&self) -> usize {
        self.sigma.nrows() / 2
    }

    pub fn p_block(&self) -> Matrix {
        let n = self.half();
        self.sigma.view((0, 0), (n, n)).into_owned()
    }

    pub fn q_block(&self) -> Matrix {
        let n = self.half();
        self.sigma.view((0, n), (n, n)).into_owned()
    }

    pub fn x_block(&self) -> Matrix {
        let n = self.half();
        self.sigma.view((n, n), (n, n)).into_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    CanonicalF0,
    Transformed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QpsState {
    sig: Signature,
    scales: ScaleConfig,
    mean: PhaseMean,
    cov: CovarianceMatrix,
    provenance: Provenance,
}

impl QpsState {
    pub fn new(
        sig: Signature,
        scales: ScaleConfig,
        mean: PhaseMean,
        cov: CovarianceMatrix,
        provenance: Provenance,
    ) -> Result<Self> {
        if mean.p.len() != sig.n() || cov.matrix().nrows() != sig.dim() {
            return Err(QpsError::DimensionMismatch(format!(
                "state dimensions do not match signature ({},{})",
                sig.n_plus(),
                sig.n_minus()
            )));
        }
        Ok(QpsState {
            sig,
            scales,
            mean,
            cov,
            provenance,
        })
    }

    pub fn signature(&self) -> Signature {
        self.sig
    }

    pub fn scales(&self) -> &ScaleConfig {
        &self.scales
    }

    pub fn mean(&self) -> &PhaseMean {
        &self.mean
    }

    pub fn cov(&self) -> &CovarianceMatrix {
        &self.cov
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Congruence by an arbitrary invertible matrix: `v·M`, `MᵀΣM`.
    ///
    /// [`transform_state`] is the physical case; this entry point exists
    /// because `Γ` only needs invertibility.
    pub fn congruent_transform(&self, m: &Matrix) -> Result<QpsState> {
        let d = self.sig.dim();
        if m.nrows() != d || m.ncols() != d {
            return Err(QpsError::DimensionMismatch(format!(
                "transform must be {d}x{d}, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Factorization::new(m)?;
        let row = self.mean.row() * m;
        let sigma = m.transpose() * self.cov.matrix() * m;
        // restore exact symmetry lost to rounding in the triple product
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        let PhaseMean { p, x } = PhaseMean::from_row(&row);
        Ok(QpsState {
            sig: self.sig,
            scales: self.scales,
            mean: PhaseMean::new(p, x)?,
            cov: CovarianceMatrix::new(sigma)?,
            provenance: Provenance::Transformed,
        })
    }

    pub fn to_file(&self) -> StateFile {
        StateFile {
            n_plus: self.sig.n_plus(),
            n_minus: self.sig.n_minus(),
            hbar: self.scales.hbar,
            ell: self.scales.ell,
            big_l: self.scales.big_l,
            mean_p: self.mean.p.iter().copied().collect(),
            mean_x: self.mean.x.iter().copied().collect(),
            cov: rows_of(self.cov.matrix()),
            provenance: self.provenance,
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.to_file()).expect("state serializes")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("state serializes")
    }

    /// Parses and validates a state JSON document.
    pub fn from_json_str(text: &str) -> Result<QpsState> {
        let file: StateFile =
            serde_json::from_str(text).map_err(|e| QpsError::Parse(e.to_string()))?;
        file.into_state()
    }
}

/// On-disk state. Indices `0..n` of `cov` are momenta, `n..2n` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub n_plus: usize,
    pub n_minus: usize,
    pub hbar: f64,
    pub ell: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub mean_p: Vec<f64>,
    pub mean_x: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl StateFile {
    pub fn into_state(self) -> Result<QpsState> {
        let sig = Signature::new(self.n_plus, self.n_minus)?;
        let scales = ScaleConfig::new(self.hbar, self.ell, self.big_l)?;
        if self.mean_p.len() != sig.n() || self.mean_x.len() != sig.n() {
            return Err(QpsError::DimensionMismatch(format!(
                "mean vectors must have length {}",
                sig.n()
            )));
        }
        let mean = PhaseMean::new(Vector::from_vec(self.mean_p), Vector::from_vec(self.mean_x))?;
        let cov = CovarianceMatrix::new(matrix_from_rows(&self.cov, sig.dim(), "cov")?)?;
        QpsState::new(sig, scales, mean, cov, self.provenance)
    }
}

/// `[[(ħ²/4ℓ²)I, (ħ/2ℓ)√(L²−ℓ²)I], [(ħ/2ℓ)√(L²−ℓ²)I, L²I]]`.
pub fn canonical_covariance(sig: Signature, scales: &ScaleConfig) -> Matrix {
    let n = sig.n();
    let p = scales.momentum_scale().powi(2);
    let x = scales.big_l.powi(2);
    let q = scales.momentum_scale() * scales.root();
    let mut sigma = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        sigma[(i, i)] = p;
        sigma[(n + i, n + i)] = x;
        sigma[(i, n + i)] = q;
        sigma[(n + i, i)] = q;
    }
    sigma
}

/// Saturated reference-frame state with means `κ` on `p_{n−1}` and `λ` on `x_{n−1}`.
pub fn canonical_state(
    sig: Signature,
    scales: &ScaleConfig,
    kappa: f64,
    lambda: f64,
) -> Result<QpsState> {
    let n = sig.n();
    let mut p = Vector::zeros(n);
    let mut x = Vector::zeros(n);
    p[n - 1] = kappa;
    x[n - 1] = lambda;
    QpsState::new(
        sig,
        *scales,
        PhaseMean::new(p, x)?,
        CovarianceMatrix::new(canonical_covariance(sig, scales))?,
        Provenance::CanonicalF0,
    )
}

/// Closed-form inverse of [`canonical_covariance`]:
/// `[[(4L²/ħ²)I, −(2/ℓħ)√(L²−ℓ²)I], [−(2/ℓħ)√(L²−ℓ²)I, (1/ℓ²)I]]`.
pub fn canonical_cov_inverse_closed_form(sig: Signature, scales: &ScaleConfig) -> Matrix {
    let n = sig.n();
    let (hbar, ell, big_l) = (scales.hbar, scales.ell, scales.big_l);
    let pp = 4.0 * big_l * big_l / (hbar * hbar);
    let xx = 1.0 / (ell * ell);
    let px = -2.0 * scales.root() / (ell * hbar);
    let mut inv = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        inv[(i, i)] = pp;
        inv[(n + i, n + i)] = xx;
        inv[(i, n + i)] = px;
        inv[(n + i, i)] = px;
    }
    inv
}

pub fn transform_state(s: &QpsState, m: &LctMatrix) -> Result<QpsState> {
    if m.signature() != s.sig {
        return Err(QpsError::DimensionMismatch(
            "LCT signature does not match the state".into(),
        ));
    }
    s.congruent_transform(m.matrix())
}

/// `Γ = v·Σ⁻¹·vᵀ`, by linear solve against `Σ`.
pub fn gamma_invariant(s: &QpsState) -> Result<f64> {
    let row = s.mean.row();
    let column = Matrix::from_column_slice(row.len(), 1, row.as_slice());
    let y = numerics::solve(s.cov.matrix(), &column)?;
    Ok((row * y)[(0, 0)])
}

/// `P_μμ X_μμ − Q_μμ² − ħ²/4` for one axis.
pub fn saturation_residual(s: &QpsState, axis: usize) -> Result<f64> {
    let n = s.sig.n();
    if axis >= n {
        return Err(QpsError::IndexOutOfRange {
            index: axis,
            len: n,
        });
    }
    let sigma = s.cov.matrix();
    let p = sigma[(axis, axis)];
    let x = sigma[(n + axis, n + axis)];
    let q = sigma[(axis, n + axis)];
    Ok(p * x - q * q - s.scales.hbar.powi(2) / 4.0)
}

pub fn cov_determinant(s: &QpsState) -> f64 {
    s.cov.matrix().clone().lu().determinant()
}

/// `‖A − B‖_F / ‖B‖_F`, or the absolute difference when `B = 0`.
pub fn relative_frobenius(a: &Matrix, b: &Matrix) -> f64 {
    let scale = frobenius(b);
    let diff = frobenius(&(a - b));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
