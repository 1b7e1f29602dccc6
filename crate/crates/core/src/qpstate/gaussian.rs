// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Per-axis complex Gaussian wave packets and a quadrature oracle for their
//! moments.
//!
//! One axis of a saturated state is the packet
//! `ψ(x) = 𝒩 exp(−(a_r + i·a_i)(x − x̄)² + i·p̄(x − x̄)/ħ)`, whose exact moments
//! are `var_x = 1/(4a_r)`, `var_p = ħ²(a_r² + a_i²)/a_r` and
//! `cov_q = −ħ·a_i/(2a_r)`; these always satisfy
//! `var_x·var_p − cov_q² = ħ²/4`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QpsError, Result};

/// Relative disagreement allowed between a quadrature and its halved-step refinement.
pub const TOL_REFINEMENT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub a_r: f64,
    pub a_i: f64,
    pub x_bar: f64,
    pub p_bar: f64,
    /// Global phase; moments do not depend on it.
    pub k_phase: f64,
}

/// Packet with coordinate variance `x_var` and symmetrized covariance `q`.
pub fn gaussian_from_cov(
    x_var: f64,
    q: f64,
    x_bar: f64,
    p_bar: f64,
    hbar: f64,
) -> Result<GaussianParams> {
    if !(x_var > 0.0 && x_var.is_finite()) {
        return Err(QpsError::NonPositiveVariance(x_var));
    }
    if !(hbar > 0.0) {
        return Err(QpsError::InvalidScales("hbar must be > 0".into()));
    }
    Ok(GaussianParams {
        a_r: 1.0 / (4.0 * x_var),
        a_i: -q / (2.0 * hbar * x_var),
        x_bar,
        p_bar,
        k_phase: 0.0,
    })
}

/// Momentum variance `(ħ²/4 + Q²)/X` implied by saturation.
pub fn implied_p_variance(x_var: f64, q: f64, hbar: f64) -> f64 {
    (hbar * hbar / 4.0 + q * q) / x_var
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments {
    pub mean_x: f64,
    pub var_x: f64,
    pub mean_p: f64,
    pub var_p: f64,
    pub cov_q: f64,
}

impl GaussianMoments {
    /// `var_x·var_p − cov_q²`.
    pub fn uncertainty_product(&self) -> f64 {
        self.var_x * self.var_p - self.cov_q * self.cov_q
    }
}

pub fn closed_form_moments(g: &GaussianParams, hbar: f64) -> GaussianMoments {
    GaussianMoments {
        mean_x: g.x_bar,
        var_x: 1.0 / (4.0 * g.a_r),
        mean_p: g.p_bar,
        var_p: hbar * hbar * (g.a_r * g.a_r + g.a_i * g.a_i) / g.a_r,
        cov_q: -hbar * g.a_i / (2.0 * g.a_r),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    /// Number of Simpson intervals (rounded up to even).
    pub node_count: usize,
    /// Half-width of the window in units of the position standard deviation.
    pub window_sigmas: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            node_count: 256,
            window_sigmas: 10.0,
        }
    }
}

/// Moments of `|ψ|²` and of `−iħ∂ψ`, by composite Simpson on
/// `[x̄ − wσ, x̄ + wσ]`, `σ = 1/(2√a_r)`, checked against a run with half the step.
pub fn gaussian_moments_quadrature(
    g: &GaussianParams,
    hbar: f64,
    quad: &QuadratureConfig,
) -> Result<GaussianMoments> {
    if !(g.a_r > 0.0 && g.a_r.is_finite()) {
        return Err(QpsError::InvalidArgument(format!(
            "a_r must be > 0, got {}",
            g.a_r
        )));
    }
    if ![g.a_i, g.x_bar, g.p_bar, g.k_phase]
        .iter()
        .all(|v| v.is_finite())
    {
        return Err(QpsError::NonFinite("Gaussian parameters".into()));
    }
    if !(hbar > 0.0 && hbar.is_finite()) {
        return Err(QpsError::InvalidScales("hbar must be > 0".into()));
    }
    if quad.node_count < 64 {
        return Err(QpsError::InvalidArgument(format!(
            "node_count must be ≥ 64, got {}",
            quad.node_count
        )));
    }
    if !(quad.window_sigmas >= 8.0 && quad.window_sigmas.is_finite()) {
        return Err(QpsError::InvalidArgument(format!(
            "window_sigmas must be ≥ 8, got {}",
            quad.window_sigmas
        )));
    }
    let intervals = quad.node_count + quad.node_count % 2;
    let coarse = simpson_moments(g, hbar, intervals, quad.window_sigmas);
    let fine = simpson_moments(g, hbar, 2 * intervals, quad.window_sigmas);

    let sx = fine.var_x.sqrt();
    let sp = fine.var_p.sqrt();
    let disagreement = [
        (coarse.mean_x - fine.mean_x).abs() / sx,
        (coarse.var_x - fine.var_x).abs() / fine.var_x,
        (coarse.mean_p - fine.mean_p).abs() / sp,
        (coarse.var_p - fine.var_p).abs() / fine.var_p,
        (coarse.cov_q - fine.cov_q).abs() / (sx * sp),
    ]
    .into_iter()
    .fold(
        0.0_f64,
        |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) },
    );
    if disagreement > TOL_REFINEMENT {
        return Err(QpsError::QuadratureNotConverged { disagreement });
    }
    Ok(fine)
}

fn simpson_moments(
    g: &GaussianParams,
    hbar: f64,
    intervals: usize,
    window: f64,
) -> GaussianMoments {
    let sigma = 0.5 / g.a_r.sqrt();
    let lo = g.x_bar - window * sigma;
    let h = 2.0 * window * sigma / intervals as f64;
    let alpha = Complex64::new(g.a_r, g.a_i);
    let norm_const = (2.0 * g.a_r / std::f64::consts::PI).powf(0.25);
    let i = Complex64::i();

    let samples: Vec<(f64, Complex64, Complex64)> = (0..=intervals)
        .map(|k| {
            let x = lo + k as f64 * h;
            let u = x - g.x_bar;
            let psi =
                norm_const * (-alpha * u * u + i * (g.p_bar * u / hbar) + i * g.k_phase).exp();
            // −iħψ', with ψ' = ψ·(−2αu + i·p̄/ħ)
            let p_psi = -i * hbar * psi * (-2.0 * alpha * u + i * (g.p_bar / hbar));
            (x, psi, p_psi)
        })
        .collect();

    let weight = |k: usize| -> f64 {
        if k == 0 || k == intervals {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let integrate = |f: &dyn Fn(&(f64, Complex64, Complex64)) -> f64| -> f64 {
        samples
            .iter()
            .enumerate()
            .map(|(k, s)| weight(k) * f(s))
            .sum::<f64>()
            * h
            / 3.0
    };

    let norm = integrate(&|s| s.1.norm_sqr());
    let mean_x = integrate(&|s| s.0 * s.1.norm_sqr()) / norm;
    let var_x = integrate(&|s| (s.0 - mean_x).powi(2) * s.1.norm_sqr()) / norm;
    let mean_p = integrate(&|s| (s.1.conj() * s.2).re) / norm;
    let var_p = integrate(&|s| (s.2 - mean_p * s.1).norm_sqr()) / norm;
    // Re⟨(x − ⟨x⟩)(p − ⟨p⟩)⟩ is the symmetrized covariance
    let cov_q = integrate(&|s| (s.1.conj() * (s.0 - mean_x) * (s.2 - mean_p * s.1)).re) / norm;

    GaussianMoments {
        mean_x,
        var_x,
        mean_p,
        var_p,
        cov_q,
    }
}
