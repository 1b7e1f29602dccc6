// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! The geometric equation of the quantum phase space and its two limits.
//!
//! In the reference frame the saturated state has means `κ` (momentum) and
//! `λ` (coordinate) on the last axis, and `Γ = L²/ℓ²` becomes the ellipse
//! `aκ² + 2bκλ + cλ² = L²/ℓ²` with `a = 4L²/ħ²`, `b = −2√(L²−ℓ²)/(ℓħ)` and
//! `c = 1/ℓ²`. For `ℓ → 0` the coordinate means approach the hyperboloid
//! `η(x, x) = −L²`; for `L → ∞` the momentum means approach
//! `η(p, p) = −(ħ/2ℓ)²`. Both approaches are first order, which the sweeps
//! below measure.

use nalgebra::RowDVector;
use serde::{Deserialize, Serialize};

use crate::error::{QpsError, Result};
use crate::numerics::{self, frobenius, loglog_fit, Matrix, RngStream};
use crate::qpstate::{
    canonical_covariance, canonical_state, gamma_invariant, relative_frobenius, transform_state,
    QpsState, ScaleConfig,
};
use crate::sympgroup::{
    build_metric, embed_de_sitter, fourier_lct, random_de_sitter, DeSitterMatrix, Metric, Signature,
};

/// Default rapidity scale of the per-point de Sitter frame in sweeps.
pub const DEFAULT_FRAME_SCALE: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub gamma_target: f64,
}

impl ConicCoefficients {
    /// `aκ² + 2bκλ + cλ²`.
    pub fn quadratic(&self, kappa: f64, lambda: f64) -> f64 {
        self.a * kappa * kappa + 2.0 * self.b * kappa * lambda + self.c * lambda * lambda
    }

    /// `ac − b²`, equal to `4/ħ²`.
    pub fn discriminant(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }
}

pub fn conic_coefficients(scales: &ScaleConfig) -> ConicCoefficients {
    let (hbar, ell, big_l) = (scales.hbar(), scales.ell(), scales.big_l());
    ConicCoefficients {
        a: 4.0 * big_l * big_l / (hbar * hbar),
        b: -2.0 * scales.root() / (ell * hbar),
        c: 1.0 / (ell * ell),
        gamma_target: scales.gamma_target(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConicPoint {
    pub kappa: f64,
    pub lambda: f64,
    pub theta: f64,
}

/// Point on the `Γ = L²/ℓ²` ellipse:
/// `κ = (ħ/2ℓ)cos θ + (ħ√(L²−ℓ²)/2ℓ²) sin θ`, `λ = (L²/ℓ) sin θ`.
pub fn conic_point(scales: &ScaleConfig, theta: f64) -> ConicPoint {
    let (hbar, ell, big_l) = (scales.hbar(), scales.ell(), scales.big_l());
    let (sin, cos) = theta.sin_cos();
    ConicPoint {
        kappa: hbar / (2.0 * ell) * cos + hbar * scales.root() / (2.0 * ell * ell) * sin,
        lambda: big_l * big_l / ell * sin,
        theta,
    }
}

/// `Σ_μ η_μμ v_μ²`.
pub fn eta_contraction(v: &[f64], metric: &Metric) -> Result<f64> {
    metric.bilinear(v, v)
}

/// Signed defect `η(x, x) + L²` of the de Sitter spacetime equation.
pub fn spacetime_defect(mean_x: &[f64], scales: &ScaleConfig, metric: &Metric) -> Result<f64> {
    Ok(eta_contraction(mean_x, metric)? + scales.big_l().powi(2))
}

/// Signed defect `η(p, p) + (ħ/2ℓ)²` of the momentum space equation.
pub fn momentum_defect(mean_p: &[f64], scales: &ScaleConfig, metric: &Metric) -> Result<f64> {
    Ok(eta_contraction(mean_p, metric)? + scales.momentum_scale().powi(2))
}

/// `|η(x, x) + L²| / L²`.
pub fn residual_x(mean_x: &[f64], scales: &ScaleConfig, metric: &Metric) -> Result<f64> {
    Ok(spacetime_defect(mean_x, scales, metric)?.abs() / scales.big_l().powi(2))
}

/// `|η(p, p) + (ħ/2ℓ)²| / (ħ/2ℓ)²`.
pub fn residual_p(mean_p: &[f64], scales: &ScaleConfig, metric: &Metric) -> Result<f64> {
    Ok(momentum_defect(mean_p, scales, metric)?.abs() / scales.momentum_scale().powi(2))
}

/// `Γ / (L²/ℓ²)`; equal to 1 on the quantum phase space.
pub fn scaled_equation_lhs(state: &QpsState) -> Result<f64> {
    Ok(gamma_invariant(state)? / state.scales().gamma_target())
}

/// `Γ` of the reference state `(κ, λ)` seen from the frame `A`, evaluated
/// through the η-form
/// `−a·η(p,p) + 2b·(p·𝕄)_{n−1}(x·𝕄)_{n−1} − c·η(x,x)`
/// with `p = κ·A_{n−1,·}`, `x = λ·A_{n−1,·}` and `𝕄 = A⁻¹ = ηAᵀη`.
///
/// The leading minus signs hold when the aligned axis carries `η = −1`; in
/// general the contractions are weighted by `η_{n−1,n−1}`.
pub fn general_frame_gamma(
    kappa: f64,
    lambda: f64,
    a: &DeSitterMatrix,
    scales: &ScaleConfig,
    metric: &Metric,
) -> Result<f64> {
    let sig = a.signature();
    let n = sig.n();
    if metric.n() != n {
        return Err(QpsError::DimensionMismatch(
            "metric and de Sitter matrix dimensions differ".into(),
        ));
    }
    let frame = a.matrix();
    let p: Vec<f64> = frame.row(n - 1).iter().map(|v| kappa * v).collect();
    let x: Vec<f64> = frame.row(n - 1).iter().map(|v| lambda * v).collect();
    let m_inv = a.inverse_matrix();
    let project = |v: &[f64]| -> f64 {
        v.iter()
            .enumerate()
            .map(|(mu, vm)| vm * m_inv[(mu, n - 1)])
            .sum()
    };
    let kappa_back = project(&p);
    let lambda_back = project(&x);

    let k = conic_coefficients(scales);
    let sign = metric.diag()[n - 1];
    Ok(sign * k.a * eta_contraction(&p, metric)?
        + 2.0 * k.b * kappa_back * lambda_back
        + sign * k.c * eta_contraction(&x, metric)?)
}

/// Coordinate mean `λ` on the conic for a given `κ`, on the branch
/// continuous with `λ = +L`:
/// `λ = (2ℓκ/ħ)√(L²−ℓ²) + √(L² − 4ℓ⁴κ²/ħ²)`.
pub fn solve_lambda_on_conic(scales: &ScaleConfig, kappa: f64) -> Result<f64> {
    let (hbar, ell, big_l) = (scales.hbar(), scales.ell(), scales.big_l());
    let discriminant = big_l * big_l - (2.0 * ell * ell * kappa / hbar).powi(2);
    if discriminant < 0.0 {
        return Err(QpsError::ConicNoRealRoot { discriminant });
    }
    Ok(2.0 * ell * kappa / hbar * scales.root() + discriminant.sqrt())
}

/// Momentum mean `κ` on the conic for a given `λ`, on the branch
/// continuous with `κ = +ħ/2ℓ`:
/// `κ = (ħ√(L²−ℓ²)/(2ℓL²))λ + √((ħ/2ℓ)² − ħ²λ²/(4L⁴))`.
pub fn solve_kappa_on_conic(scales: &ScaleConfig, lambda: f64) -> Result<f64> {
    let (hbar, ell, big_l) = (scales.hbar(), scales.ell(), scales.big_l());
    let discriminant =
        scales.momentum_scale().powi(2) - (hbar * lambda / (2.0 * big_l * big_l)).powi(2);
    if discriminant < 0.0 {
        return Err(QpsError::ConicNoRealRoot { discriminant });
    }
    Ok(hbar * scales.root() / (2.0 * ell * big_l * big_l) * lambda + discriminant.sqrt())
}

/// `points` values from `start` to `end` with constant ratio.
pub fn geometric_sequence(start: f64, end: f64, points: usize) -> Result<Vec<f64>> {
    if !(start > 0.0 && end > 0.0 && start.is_finite() && end.is_finite()) {
        return Err(QpsError::InvalidArgument(
            "sequence endpoints must be positive".into(),
        ));
    }
    match points {
        0 => Err(QpsError::InvalidArgument("need at least one point".into())),
        1 => Ok(vec![start]),
        _ => {
            let (ls, le) = (start.ln(), end.ln());
            Ok((0..points)
                .map(|i| {
                    if i == 0 {
                        start
                    } else if i == points - 1 {
                        end
                    } else {
                        (ls + (le - ls) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllSweepConfig {
    pub kappa: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub hbar: f64,
    /// Strictly decreasing, all below `L`.
    pub ell_values: Vec<f64>,
    pub ds_seed: u64,
    pub ds_scale: f64,
    /// Report `|η(x,x) + L²|` instead of the relative residual.
    pub absolute: bool,
}

impl EllSweepConfig {
    pub fn new(kappa: f64, big_l: f64, hbar: f64, ell_values: Vec<f64>, ds_seed: u64) -> Self {
        EllSweepConfig {
            kappa,
            big_l,
            hbar,
            ell_values,
            ds_seed,
            ds_scale: DEFAULT_FRAME_SCALE,
            absolute: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LSweepConfig {
    pub lambda: f64,
    pub ell: f64,
    pub hbar: f64,
    /// Strictly increasing, all above `ℓ`.
    #[serde(rename = "L_values")]
    pub l_values: Vec<f64>,
    pub ds_seed: u64,
    pub ds_scale: f64,
    /// Report `|η(p,p) + (ħ/2ℓ)²|` instead of the relative residual.
    pub absolute: bool,
}

impl LSweepConfig {
    pub fn new(lambda: f64, ell: f64, hbar: f64, l_values: Vec<f64>, ds_seed: u64) -> Self {
        LSweepConfig {
            lambda,
            ell,
            hbar,
            l_values,
            ds_seed,
            ds_scale: DEFAULT_FRAME_SCALE,
            absolute: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "sweep")]
pub enum SweepConfig {
    #[serde(rename = "ell")]
    Ell(EllSweepConfig),
    #[serde(rename = "L")]
    L(LSweepConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub scale: f64,
    pub residual: f64,
}

/// Residuals of one limit equation against the scale parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
    /// Log-log slope of residual against `ℓ` (or `1/L`); `None` when the
    /// residuals are not all positive.
    pub fitted_order: Option<f64>,
    pub final_residual: f64,
    /// Largest change of a residual between the reference frame and the
    /// random de Sitter frame.
    pub frame_spread: f64,
    pub config: SweepConfig,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scale,residual\n");
        for p in &self.points {
            out.push_str(&format!("{:e},{:e}\n", p.scale, p.residual));
        }
        match self.fitted_order {
            Some(order) => out.push_str(&format!("# fitted_order={order}\n")),
            None => out.push_str("# fitted_order=none\n"),
        }
        out.push_str(&format!("# final_residual={:e}\n", self.final_residual));
        out
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep report serializes")
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

fn transformed_row(frame: &DeSitterMatrix, row: &RowDVector<f64>) -> Result<Vec<f64>> {
    let m = embed_de_sitter(frame)?;
    Ok((row * m.matrix()).iter().copied().collect())
}

fn strictly_monotone(values: &[f64], increasing: bool) -> bool {
    values
        .windows(2)
        .all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] })
}

/// `ℓ → 0` sweep: for each `ℓ`, put `(κ, λ(κ))` on the conic, move it to a
/// seeded random de Sitter frame, and measure the spacetime residual there.
pub fn limit_sweep_ell(config: &EllSweepConfig) -> Result<SweepReport> {
    if config.ell_values.is_empty() || !strictly_monotone(&config.ell_values, false) {
        return Err(QpsError::InvalidArgument(
            "ell values must be non-empty and strictly decreasing".into(),
        ));
    }
    if !config.kappa.is_finite() {
        return Err(QpsError::NonFinite("kappa".into()));
    }
    let sig = Signature::de_sitter();
    let metric = build_metric(sig);
    let n = sig.n();
    let mut points = Vec::with_capacity(config.ell_values.len());
    let mut frame_spread = 0.0_f64;
    for (index, &ell) in config.ell_values.iter().enumerate() {
        if !(ell < config.big_l) {
            return Err(QpsError::InvalidArgument(format!(
                "ell = {ell} must be below L = {}",
                config.big_l
            )));
        }
        let scales = ScaleConfig::new(config.hbar, ell, config.big_l)?;
        let lambda = solve_lambda_on_conic(&scales, config.kappa)?;
        let mut row = RowDVector::zeros(2 * n);
        row[n - 1] = config.kappa;
        row[2 * n - 1] = lambda;
        let frame = random_de_sitter(
            sig,
            &mut RngStream::new(config.ds_seed, index as u64),
            config.ds_scale,
        )?;
        let moved = transformed_row(&frame, &row)?;

        let reference = residual_x(&row.as_slice()[n..], &scales, &metric)?;
        let residual = residual_x(&moved[n..], &scales, &metric)?;
        frame_spread = frame_spread.max((residual - reference).abs());
        let reported = if config.absolute {
            residual * config.big_l.powi(2)
        } else {
            residual
        };
        points.push(SweepPoint {
            scale: ell,
            residual: reported,
        });
    }
    let fit_points: Vec<(f64, f64)> = points.iter().map(|p| (p.scale, p.residual)).collect();
    Ok(SweepReport {
        fitted_order: loglog_fit(&fit_points).ok().map(|f| f.slope),
        final_residual: points.last().map(|p| p.residual).unwrap_or(0.0),
        points,
        frame_spread,
        config: SweepConfig::Ell(config.clone()),
    })
}

/// `L → ∞` sweep: mirror of [`limit_sweep_ell`] with `λ` fixed and the
/// momentum residual measured; the order is fitted against `1/L`.
pub fn limit_sweep_l(config: &LSweepConfig) -> Result<SweepReport> {
    if config.l_values.is_empty() || !strictly_monotone(&config.l_values, true) {
        return Err(QpsError::InvalidArgument(
            "L values must be non-empty and strictly increasing".into(),
        ));
    }
    if !config.lambda.is_finite() {
        return Err(QpsError::NonFinite("lambda".into()));
    }
    let sig = Signature::de_sitter();
    let metric = build_metric(sig);
    let n = sig.n();
    let mut points = Vec::with_capacity(config.l_values.len());
    let mut frame_spread = 0.0_f64;
    for (index, &big_l) in config.l_values.iter().enumerate() {
        if !(big_l > config.ell) {
            return Err(QpsError::InvalidArgument(format!(
                "L = {big_l} must exceed ell = {}",
                config.ell
            )));
        }
        let scales = ScaleConfig::new(config.hbar, config.ell, big_l)?;
        let kappa = solve_kappa_on_conic(&scales, config.lambda)?;
        let mut row = RowDVector::zeros(2 * n);
        row[n - 1] = kappa;
        row[2 * n - 1] = config.lambda;
        let frame = random_de_sitter(
            sig,
            &mut RngStream::new(config.ds_seed, index as u64),
            config.ds_scale,
        )?;
        let moved = transformed_row(&frame, &row)?;

        let reference = residual_p(&row.as_slice()[..n], &scales, &metric)?;
        let residual = residual_p(&moved[..n], &scales, &metric)?;
        frame_spread = frame_spread.max((residual - reference).abs());
        let reported = if config.absolute {
            residual * scales.momentum_scale().powi(2)
        } else {
            residual
        };
        points.push(SweepPoint {
            scale: big_l,
            residual: reported,
        });
    }
    let fit_points: Vec<(f64, f64)> = points.iter().map(|p| (1.0 / p.scale, p.residual)).collect();
    Ok(SweepReport {
        fitted_order: loglog_fit(&fit_points).ok().map(|f| f.slope),
        final_residual: points.last().map(|p| p.residual).unwrap_or(0.0),
        points,
        frame_spread,
        config: SweepConfig::L(config.clone()),
    })
}

/// Outcome of the coordinate/momentum exchange by the Fourier-type LCT with
/// `c = ħ/(2ℓL)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub c: f64,
    /// Largest relative error of the image means against `(±ħ/2ℓ, 0)`.
    pub mean_map_error: f64,
    /// Largest absolute `residual_p` of the images of `(0, ±L)`.
    pub residual_p_max: f64,
    /// `‖Σ' − Σ̃‖_F / ‖Σ‖_F` where `Σ̃` is the canonical covariance with `Q ↦ −Q`.
    pub covariance_error: f64,
    /// Largest relative change of `Γ`.
    pub gamma_relative_change: f64,
    /// `‖M_F² + I‖_F`.
    pub involution_error: f64,
}

pub fn born_duality_check(sig: Signature, scales: &ScaleConfig) -> Result<DualityReport> {
    let n = sig.n();
    let metric = build_metric(sig);
    let c = scales.hbar() / (2.0 * scales.ell() * scales.big_l());
    let swap = fourier_lct(sig, c)?;
    let h = scales.momentum_scale();

    let mut expected_cov = canonical_covariance(sig, scales);
    for i in 0..n {
        expected_cov[(i, n + i)] *= -1.0;
        expected_cov[(n + i, i)] *= -1.0;
    }

    let mut mean_map_error = 0.0_f64;
    let mut residual_p_max = 0.0_f64;
    let mut covariance_error = 0.0_f64;
    let mut gamma_relative_change = 0.0_f64;
    for sign in [1.0, -1.0] {
        let state = canonical_state(sig, scales, 0.0, sign * scales.big_l())?;
        let image = transform_state(&state, &swap)?;
        let mut target = numerics::Vector::zeros(n);
        target[n - 1] = sign * h;
        let err = (&image.mean().p - &target)
            .norm()
            .max(image.mean().x.norm())
            / h;
        mean_map_error = mean_map_error.max(err);
        residual_p_max =
            residual_p_max.max(residual_p(image.mean().p.as_slice(), scales, &metric)?);
        covariance_error =
            covariance_error.max(relative_frobenius(image.cov().matrix(), &expected_cov));
        let before = gamma_invariant(&state)?;
        let after = gamma_invariant(&image)?;
        gamma_relative_change = gamma_relative_change.max(((after - before) / before).abs());
    }
    let d = sig.dim();
    let square = swap.matrix() * swap.matrix();
    Ok(DualityReport {
        c,
        mean_map_error,
        residual_p_max,
        covariance_error,
        gamma_relative_change,
        involution_error: frobenius(&(square + Matrix::identity(d, d))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qpstate::Provenance;
    use crate::sympgroup::random_lct;
    use approx::assert_abs_diff_eq;

    fn desk() -> ScaleConfig {
        ScaleConfig::desk()
    }

    fn metric() -> Metric {
        build_metric(Signature::de_sitter())
    }

    #[test]
    fn coefficients_at_desk_scales() {
        let k = conic_coefficients(&desk());
        assert_eq!(k.a, 16.0);
        assert_abs_diff_eq!(k.b, -7.745967, epsilon = 1e-6);
        assert_eq!(k.c, 4.0);
        assert_eq!(k.gamma_target, 16.0);
        assert!((k.discriminant() - 4.0).abs() <= 1e-12 * 4.0);

        let k = conic_coefficients(&ScaleConfig::new(1.0, 1.0, 1.0).unwrap());
        assert_eq!(k.b, 0.0);
    }

    #[test]
    fn discriminant_identity_across_scales() {
        for (hbar, ell, big_l) in [(1.0, 0.5, 2.0), (2.0, 0.3, 1.7), (0.7, 1e-3, 10.0)] {
            let k = conic_coefficients(&ScaleConfig::new(hbar, ell, big_l).unwrap());
            let expected = 4.0 / (hbar * hbar);
            assert!((k.discriminant() - expected).abs() <= 1e-12 * k.a * k.c);
        }
    }

    #[test]
    fn conic_point_examples() {
        let k = conic_coefficients(&desk());
        let p = conic_point(&desk(), 0.0);
        assert_eq!((p.kappa, p.lambda), (1.0, 0.0));
        assert_eq!(k.quadratic(p.kappa, p.lambda), 16.0);

        let theta = f64::atan2(0.25, -(3.75_f64.sqrt()) / 2.0);
        let p = conic_point(&desk(), theta);
        assert_abs_diff_eq!(p.kappa, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.lambda, 2.0, epsilon = 1e-14);

        let p = conic_point(&desk(), std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(p.kappa, 3.872983, epsilon = 1e-6);
        assert_abs_diff_eq!(p.lambda, 8.0, epsilon = 1e-14);
        assert!((k.quadratic(p.kappa, p.lambda) / 16.0 - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn eta_contraction_examples() {
        let m = metric();
        assert_eq!(
            eta_contraction(&[1.0, 0.0, 0.0, 0.0, 0.0], &m).unwrap(),
            1.0
        );
        assert_eq!(
            eta_contraction(&[1.5, 0.0, 0.0, 0.0, 2.5], &m).unwrap(),
            -4.0
        );
        assert_eq!(eta_contraction(&[0.0; 5], &m).unwrap(), 0.0);
        assert!(matches!(
            eta_contraction(&[1.0; 4], &m),
            Err(QpsError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn residual_examples() {
        let m = metric();
        let s = desk();
        assert_eq!(residual_x(&[0.0, 0.0, 0.0, 0.0, 2.0], &s, &m).unwrap(), 0.0);
        assert_eq!(residual_x(&[1.5, 0.0, 0.0, 0.0, 2.5], &s, &m).unwrap(), 0.0);
        assert_eq!(residual_x(&[0.0; 5], &s, &m).unwrap(), 1.0);
        assert_eq!(residual_p(&[0.0, 0.0, 0.0, 0.0, 1.0], &s, &m).unwrap(), 0.0);
        assert_eq!(residual_p(&[0.0; 5], &s, &m).unwrap(), 1.0);

        let boost = DeSitterMatrix::boost(Signature::de_sitter(), 0.9).unwrap();
        let row = nalgebra::RowDVector::from_row_slice(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        let moved = &row * boost.matrix();
        assert!(residual_p(moved.as_slice(), &s, &m).unwrap() <= 1e-15);
    }

    #[test]
    fn scaled_lhs_examples() {
        let sig = Signature::de_sitter();
        let s = canonical_state(sig, &desk(), 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(scaled_equation_lhs(&s).unwrap(), 1.0, epsilon = 1e-14);
        let zero = canonical_state(sig, &desk(), 0.0, 0.0).unwrap();
        assert_eq!(scaled_equation_lhs(&zero).unwrap(), 0.0);

        let mut rng = RngStream::new(21, 0);
        for _ in 0..100 {
            let m = random_lct(sig, &mut rng, 0.3).unwrap();
            let t = transform_state(&s, &m).unwrap();
            assert_eq!(t.provenance(), Provenance::Transformed);
            assert!((scaled_equation_lhs(&t).unwrap() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn general_frame_gamma_identity_frame_is_conic() {
        let sig = Signature::de_sitter();
        let k = conic_coefficients(&desk());
        let id = DeSitterMatrix::identity(sig);
        for (kappa, lambda) in [(1.0, 0.0), (0.3, -1.7), (-2.0, 0.4)] {
            let g = general_frame_gamma(kappa, lambda, &id, &desk(), &metric()).unwrap();
            assert!(
                (g - k.quadratic(kappa, lambda)).abs()
                    <= 1e-12 * k.quadratic(kappa, lambda).abs().max(1.0)
            );
        }
    }

    #[test]
    fn general_frame_gamma_boost_two_paths() {
        let sig = Signature::de_sitter();
        #[allow(clippy::approx_constant)]
        let boost = DeSitterMatrix::boost(sig, 0.693147).unwrap();
        let eta_form = general_frame_gamma(1.0, 0.0, &boost, &desk(), &metric()).unwrap();
        let direct = gamma_invariant(
            &transform_state(
                &canonical_state(sig, &desk(), 1.0, 0.0).unwrap(),
                &embed_de_sitter(&boost).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!((eta_form / 16.0 - 1.0).abs() <= 1e-12);
        assert!((direct / eta_form - 1.0).abs() <= 1e-9);
    }

    /// Independent root check: plug the root back into the conic.
    #[test]
    fn conic_roots_satisfy_the_conic() {
        for (ell, kappa) in [(0.5, 1.0), (0.5, -0.7), (1e-3, 3.0), (0.9, 0.2)] {
            let s = ScaleConfig::new(1.0, ell, 1.0).unwrap();
            let lambda = solve_lambda_on_conic(&s, kappa).unwrap();
            let k = conic_coefficients(&s);
            assert!((k.quadratic(kappa, lambda) / k.gamma_target - 1.0).abs() <= 1e-12);
        }
        for (big_l, lambda) in [(2.0, 1.0), (10.0, -3.0), (1e3, 1.0)] {
            let s = ScaleConfig::new(1.0, 1.0, big_l).unwrap();
            let kappa = solve_kappa_on_conic(&s, lambda).unwrap();
            let k = conic_coefficients(&s);
            assert!((k.quadratic(kappa, lambda) / k.gamma_target - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn conic_root_branches() {
        let s = ScaleConfig::new(1.0, 1e-4, 1.0).unwrap();
        assert_eq!(solve_lambda_on_conic(&s, 0.0).unwrap(), 1.0);
        assert!((solve_lambda_on_conic(&s, 2.0).unwrap() - 1.0).abs() < 1e-2);
        let s = ScaleConfig::new(1.0, 1.0, 1e4).unwrap();
        assert!((solve_kappa_on_conic(&s, 0.0).unwrap() - 0.5).abs() <= 1e-15);
        // no real root: 4ℓ⁴κ²/ħ² > L²
        let s = ScaleConfig::new(1.0, 0.9, 1.0).unwrap();
        assert!(matches!(
            solve_lambda_on_conic(&s, 10.0),
            Err(QpsError::ConicNoRealRoot { .. })
        ));
    }

    #[test]
    fn geometric_sequences() {
        let v = geometric_sequence(1e-2, 1e-6, 5).unwrap();
        assert_eq!(v[0], 1e-2);
        assert_eq!(v[4], 1e-6);
        assert!((v[2] / 1e-4 - 1.0).abs() < 1e-12);
        assert_eq!(geometric_sequence(3.0, 5.0, 1).unwrap(), vec![3.0]);
        assert!(geometric_sequence(0.0, 1.0, 3).is_err());
    }

    #[test]
    fn ell_sweep_small() {
        let ells = geometric_sequence(1e-2, 1e-6, 5).unwrap();
        let report = limit_sweep_ell(&EllSweepConfig::new(1.0, 1.0, 1.0, ells, 3)).unwrap();
        for p in &report.points {
            let ratio = p.residual / (4.0 * p.scale);
            assert!((ratio - 1.0).abs() < 0.25, "{p:?}");
        }
        assert!((report.fitted_order.unwrap() - 1.0).abs() <= 0.1);
        assert!(report.frame_spread <= 1e-10);
    }

    #[test]
    fn ell_sweep_kappa_zero_is_exact() {
        let ells = geometric_sequence(1e-2, 1e-6, 5).unwrap();
        let report = limit_sweep_ell(&EllSweepConfig::new(0.0, 1.0, 1.0, ells, 3)).unwrap();
        assert!(report.max_residual() <= 1e-12);
    }

    #[test]
    fn ell_sweep_grows_toward_l() {
        let ells = vec![0.4, 0.2, 0.1, 0.05, 0.025];
        let report = limit_sweep_ell(&EllSweepConfig::new(1.0, 1.0, 1.0, ells, 9)).unwrap();
        // listed with decreasing ℓ, so residuals must decrease
        assert!(report
            .points
            .windows(2)
            .all(|w| w[1].residual < w[0].residual));
    }

    #[test]
    fn ell_sweep_rejects_bad_ranges() {
        let inc = EllSweepConfig::new(1.0, 1.0, 1.0, vec![1e-6, 1e-2], 1);
        assert!(limit_sweep_ell(&inc).is_err());
        let above = EllSweepConfig::new(1.0, 1.0, 1.0, vec![2.0, 1e-2], 1);
        assert!(limit_sweep_ell(&above).is_err());
        assert!(limit_sweep_ell(&EllSweepConfig::new(1.0, 1.0, 1.0, vec![], 1)).is_err());
    }

    #[test]
    fn l_sweep_small() {
        let ls = geometric_sequence(1e2, 1e6, 5).unwrap();
        let report = limit_sweep_l(&LSweepConfig::new(1.0, 1.0, 1.0, ls, 4)).unwrap();
        for p in &report.points {
            let ratio = p.residual / (2.0 / p.scale);
            assert!((ratio - 1.0).abs() < 0.25, "{p:?}");
        }
        assert!((report.fitted_order.unwrap() - 1.0).abs() <= 0.1);
        assert!(report.frame_spread <= 1e-10);
        let zero = limit_sweep_l(&LSweepConfig::new(
            0.0,
            1.0,
            1.0,
            geometric_sequence(1e2, 1e6, 5).unwrap(),
            4,
        ))
        .unwrap();
        assert!(zero.max_residual() <= 1e-12);
        assert!(limit_sweep_l(&LSweepConfig::new(1.0, 1.0, 1.0, vec![1e6, 1e2], 4)).is_err());
    }

    #[test]
    fn branch_policy_picks_the_root_near_plus_l() {
        // the other root of the ℓ-conic sits near −L with the same leading
        // residual, so only the sign separates the branches
        let s = ScaleConfig::new(1.0, 1e-4, 1.0).unwrap();
        let k = conic_coefficients(&s);
        let good = solve_lambda_on_conic(&s, 1.0).unwrap();
        let other = -2.0 * k.b / k.c * 1.0 - good;
        assert!((k.quadratic(1.0, other) / k.gamma_target - 1.0).abs() < 1e-9);
        let r_good = residual_x(&[0.0, 0.0, 0.0, 0.0, good], &s, &metric()).unwrap();
        let r_other = residual_x(&[0.0, 0.0, 0.0, 0.0, other], &s, &metric()).unwrap();
        assert!((r_good / (4.0 * 1e-4) - 1.0).abs() < 0.01);
        assert!((r_other / (4.0 * 1e-4) - 1.0).abs() < 0.01);
        assert!(good > 0.0 && other < 0.0);
        assert!((good - 1.0).abs() < 1e-3);
    }

    #[test]
    fn sweep_csv_layout() {
        let report =
            limit_sweep_ell(&EllSweepConfig::new(1.0, 1.0, 1.0, vec![1e-2, 1e-3], 1)).unwrap();
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "scale,residual");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("1e-2,"));
        assert!(lines[3].starts_with("# fitted_order="));
        assert!(lines[4].starts_with("# final_residual="));
        let json: serde_json::Value = serde_json::from_str(&report.to_json_string()).unwrap();
        assert_eq!(json["config"]["sweep"], "ell");
    }

    #[test]
    fn duality_at_desk_scales() {
        let r = born_duality_check(Signature::de_sitter(), &desk()).unwrap();
        assert_eq!(r.c, 0.5);
        assert!(r.mean_map_error <= 1e-15);
        assert!(r.residual_p_max <= 1e-12);
        assert!(r.covariance_error <= 1e-15);
        assert!(r.gamma_relative_change <= 1e-9);
        assert_eq!(r.involution_error, 0.0);
    }
}
