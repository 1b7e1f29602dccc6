// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Invariant suites behind `qps verify`.
//!
//! Every suite draws from its own random stream, so adding trials to one
//! suite never shifts the samples of another.

use std::f64::consts::PI;

use qps_core::geometry::{
    born_duality_check, conic_point, general_frame_gamma, scaled_equation_lhs, DEFAULT_FRAME_SCALE,
};
use qps_core::numerics::{self, determinant, expm, Check, Matrix, RngStream};
use qps_core::qpstate::gaussian::{
    gaussian_from_cov, gaussian_moments_quadrature, QuadratureConfig,
};
use qps_core::qpstate::{
    canonical_cov_inverse_closed_form, canonical_covariance, canonical_state, cov_determinant,
    gamma_invariant, relative_frobenius, saturation_residual, transform_state,
};
use qps_core::sympgroup::{
    build_metric, embed_de_sitter, random_de_sitter, random_lct, random_sp_generator,
    symplectic_deviation, Signature, DEFAULT_GENERATOR_SCALE, TOL_DETERMINANT, TOL_MEMBERSHIP,
};
use qps_core::Result;
use serde::Serialize;

use crate::config::CliConfig;

const STREAM_MEMBERSHIP: u64 = 1;
const STREAM_GAMMA: u64 = 2;
const STREAM_TWO_PATH: u64 = 3;

const TOL_GAMMA_EXACT: f64 = 1e-12;
const TOL_GAMMA_INVARIANCE: f64 = 1e-9;
const TOL_INVERSE: f64 = 1e-12;
const TOL_SATURATION: f64 = 1e-13;
const TOL_CONIC: f64 = 1e-12;
const TOL_UNCERTAINTY_PRODUCT: f64 = 1e-10;
const TOL_QUADRATURE_MOMENTS: f64 = 1e-8;
const TOL_TWO_PATH: f64 = 1e-9;
const TOL_DUALITY: f64 = 1e-12;
const TOL_DETERMINANT_TRANSFORMED: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub version: String,
    pub config: CliConfig,
    pub checks: Vec<Check>,
    pub overall_pass: bool,
}

impl VerificationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,max_error,tolerance,pass\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{:e},{:e},{}\n",
                c.name, c.max_error, c.tolerance, c.pass
            ));
        }
        out.push_str(&format!("# overall_pass={}\n", self.overall_pass));
        out.push_str(&format!("# version={}\n", self.version));
        out
    }
}

type Suite = fn(&CliConfig) -> Result<Vec<Check>>;

const SUITES: &[(&str, Suite)] = &[
    ("symplectic_membership", membership_suite),
    ("gamma_invariance", gamma_suite),
    ("closed_form_inverse", inverse_suite),
    ("saturation", saturation_suite),
    ("gaussian_quadrature", gaussian_suite),
    ("two_path", two_path_suite),
    ("born_duality", duality_suite),
];

pub fn run_verify(config: &CliConfig) -> VerificationReport {
    let mut checks = Vec::new();
    for (name, suite) in SUITES {
        match suite(config) {
            Ok(mut c) => checks.append(&mut c),
            Err(e) => {
                eprintln!("suite {name} aborted: {e}");
                checks.push(Check::new(format!("{name}_completed"), f64::INFINITY, 0.0));
            }
        }
    }
    let overall_pass = checks.iter().all(|c| c.pass);
    VerificationReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        checks,
        overall_pass,
    }
}

fn relative(value: f64, target: f64) -> f64 {
    ((value - target) / target).abs()
}

fn membership_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let mut stream = RngStream::new(config.seed, STREAM_MEMBERSHIP);
    let mut worst_dev = 0.0_f64;
    let mut worst_det = 0.0_f64;
    for _ in 0..config.trials {
        let s = random_sp_generator(sig, &mut stream, DEFAULT_GENERATOR_SCALE)?;
        let m = expm(&s)?;
        worst_dev = worst_dev.max(symplectic_deviation(sig, &m)?);
        worst_det = worst_det.max((determinant(&m)? - 1.0).abs());
    }
    Ok(vec![
        Check::new(
            "symplectic_membership",
            worst_dev,
            config.tol_or(TOL_MEMBERSHIP),
        ),
        Check::new(
            "symplectic_determinant",
            worst_det,
            config.tol_or(TOL_DETERMINANT),
        ),
    ])
}

/// Γ and det Σ of the canonical state at θ = 0, before and after random LCTs.
fn gamma_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let scales = config.scales();
    let point = conic_point(scales, 0.0);
    let state = canonical_state(sig, scales, point.kappa, point.lambda)?;
    let target = scales.gamma_target();
    let gamma0 = gamma_invariant(&state)?;
    let det_target = (scales.hbar().powi(2) / 4.0).powi(sig.n() as i32);
    let det0 = cov_determinant(&state);

    let mut stream = RngStream::new(config.seed, STREAM_GAMMA);
    let mut worst_gamma = 0.0_f64;
    let mut worst_det = 0.0_f64;
    let mut definiteness_lost = 0_usize;
    for _ in 0..config.trials {
        let m = random_lct(sig, &mut stream, DEFAULT_GENERATOR_SCALE)?;
        // the covariance constructor rejects matrices that are not positive definite
        match transform_state(&state, &m) {
            Ok(image) => {
                worst_gamma = worst_gamma.max(relative(gamma_invariant(&image)?, gamma0));
                worst_det = worst_det.max(relative(cov_determinant(&image), det_target));
            }
            Err(_) => definiteness_lost += 1,
        }
    }
    Ok(vec![
        Check::new(
            "gamma_canonical",
            relative(gamma0, target),
            config.tol_or(TOL_GAMMA_EXACT),
        ),
        Check::new(
            "gamma_invariance",
            worst_gamma,
            config.tol_or(TOL_GAMMA_INVARIANCE),
        ),
        Check::new(
            "cov_determinant_canonical",
            relative(det0, det_target),
            config.tol_or(TOL_INVERSE),
        ),
        Check::new(
            "cov_determinant_transformed",
            worst_det,
            config.tol_or(TOL_DETERMINANT_TRANSFORMED),
        ),
        Check::new("positive_definite_lost", definiteness_lost as f64, 0.0),
    ])
}

fn inverse_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let d = sig.dim();
    let sigma = canonical_covariance(sig, config.scales());
    let closed = canonical_cov_inverse_closed_form(sig, config.scales());
    let identity = Matrix::identity(d, d);
    let numeric = numerics::inverse(&sigma)?;
    Ok(vec![
        Check::new(
            "inverse_closed_form_identity",
            relative_frobenius(&(&closed * &sigma), &identity),
            config.tol_or(TOL_INVERSE),
        ),
        Check::new(
            "inverse_closed_form_vs_solve",
            relative_frobenius(&closed, &numeric),
            config.tol_or(TOL_INVERSE),
        ),
    ])
}

/// Per-axis saturation, relative to `P·X`, and conic containment over evenly
/// spaced θ.
fn saturation_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let scales = config.scales();
    let n = sig.n();
    let mut worst_saturation = 0.0_f64;
    let mut worst_conic = 0.0_f64;
    for k in 0..config.trials {
        let theta = 2.0 * PI * k as f64 / config.trials as f64;
        let point = conic_point(scales, theta);
        let state = canonical_state(sig, scales, point.kappa, point.lambda)?;
        let sigma = state.cov().matrix();
        for axis in 0..n {
            let scale = sigma[(axis, axis)] * sigma[(n + axis, n + axis)];
            worst_saturation =
                worst_saturation.max(saturation_residual(&state, axis)?.abs() / scale);
        }
        worst_conic = worst_conic.max((scaled_equation_lhs(&state)? - 1.0).abs());
    }
    Ok(vec![
        Check::new(
            "saturation",
            worst_saturation,
            config.tol_or(TOL_SATURATION),
        ),
        Check::new("conic_containment", worst_conic, config.tol_or(TOL_CONIC)),
    ])
}

/// The Gaussian wavepacket built from one canonical axis must reproduce that
/// axis' (P, X, Q) and the minimal uncertainty product.
fn gaussian_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let scales = config.scales();
    let n = sig.n();
    let hbar = scales.hbar();
    let sigma = canonical_covariance(sig, scales);
    let (p, x, q) = (sigma[(0, 0)], sigma[(n, n)], sigma[(0, n)]);
    let point = conic_point(scales, 0.0);
    let g = gaussian_from_cov(x, q, point.lambda, point.kappa, hbar)?;
    let moments = gaussian_moments_quadrature(&g, hbar, &QuadratureConfig::default())?;

    let floor = hbar * hbar / 4.0;
    let cross_scale = (moments.var_x * moments.var_p).sqrt();
    let moment_error = [
        relative(moments.var_x, x),
        relative(moments.var_p, p),
        (moments.cov_q - q).abs() / cross_scale,
        (moments.mean_x - point.lambda).abs() / moments.var_x.sqrt(),
        (moments.mean_p - point.kappa).abs() / moments.var_p.sqrt(),
    ]
    .into_iter()
    .fold(0.0_f64, f64::max);
    Ok(vec![
        Check::new(
            "gaussian_uncertainty_product",
            relative(moments.uncertainty_product(), floor),
            config.tol_or(TOL_UNCERTAINTY_PRODUCT),
        ),
        Check::new(
            "gaussian_moments",
            moment_error,
            config.tol_or(TOL_QUADRATURE_MOMENTS),
        ),
    ])
}

/// Γ of a de Sitter-transformed conic state, directly and through the η-form.
fn two_path_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let sig = Signature::de_sitter();
    let scales = config.scales();
    let metric = build_metric(sig);
    let mut stream = RngStream::new(config.seed, STREAM_TWO_PATH);
    let mut worst = 0.0_f64;
    for _ in 0..config.trials {
        let frame = random_de_sitter(sig, &mut stream, DEFAULT_FRAME_SCALE)?;
        let theta = 2.0 * PI * stream.next_unit();
        let point = conic_point(scales, theta);
        let state = canonical_state(sig, scales, point.kappa, point.lambda)?;
        let image = transform_state(&state, &embed_de_sitter(&frame)?)?;
        let direct = gamma_invariant(&image)?;
        let eta_form = general_frame_gamma(point.kappa, point.lambda, &frame, scales, &metric)?;
        worst = worst.max(((direct - eta_form) / scales.gamma_target()).abs());
    }
    Ok(vec![Check::new(
        "two_path_gamma",
        worst,
        config.tol_or(TOL_TWO_PATH),
    )])
}

fn duality_suite(config: &CliConfig) -> Result<Vec<Check>> {
    let r = born_duality_check(Signature::de_sitter(), config.scales())?;
    Ok(vec![
        Check::new(
            "duality_residual_p",
            r.residual_p_max,
            config.tol_or(TOL_DUALITY),
        ),
        Check::new(
            "duality_mean_map",
            r.mean_map_error,
            config.tol_or(TOL_DUALITY),
        ),
        Check::new(
            "duality_covariance",
            r.covariance_error,
            config.tol_or(TOL_DUALITY),
        ),
        Check::new(
            "duality_gamma",
            r.gamma_relative_change,
            config.tol_or(TOL_GAMMA_INVARIANCE),
        ),
        Check::new(
            "duality_involution",
            r.involution_error,
            config.tol_or(TOL_DUALITY),
        ),
    ])
}
