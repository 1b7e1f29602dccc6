// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpsError {
    #[error("SingularMatrix: pivot {pivot} has magnitude {magnitude:e} below floor {floor:e}")]
    SingularMatrix {
        pivot: usize,
        magnitude: f64,
        floor: f64,
    },
    #[error("NonFinite: {0}")]
    NonFinite(String),
    #[error("InsufficientPoints: need at least 2 points, got {0}")]
    InsufficientPoints(usize),
    #[error("NonPositiveValue: point {index} has a non-positive coordinate")]
    NonPositiveValue { index: usize },
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NotInAlgebra: |S^T J + J S|_F = {deviation:e} exceeds {tolerance:e}")]
    NotInAlgebra { deviation: f64, tolerance: f64 },
    #[error("NormTooLarge: |S|_F = {norm} exceeds {limit}")]
    NormTooLarge { norm: f64, limit: f64 },
    #[error("NotSymplectic: deviation {deviation:e} exceeds {tolerance:e}")]
    NotSymplectic { deviation: f64, tolerance: f64 },
    #[error("NotDeSitter: deviation {deviation:e} exceeds {tolerance:e}")]
    NotDeSitter { deviation: f64, tolerance: f64 },
    #[error("ZeroScale: scale factor must be nonzero")]
    ZeroScale,
    #[error("InvalidScales: {0}")]
    InvalidScales(String),
    #[error("InvalidSignature: {0}")]
    InvalidSignature(String),
    #[error("InvalidState: {0}")]
    InvalidState(String),
    #[error("IndexOutOfRange: axis {index} for dimension {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("NonPositiveVariance: {0}")]
    NonPositiveVariance(f64),
    #[error("QuadratureNotConverged: refinement disagreement {disagreement:e}")]
    QuadratureNotConverged { disagreement: f64 },
    #[error("ConicNoRealRoot: discriminant {discriminant:e} is negative")]
    ConicNoRealRoot { discriminant: f64 },
    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),
    #[error("Parse: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, QpsError>;
