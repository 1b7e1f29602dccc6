// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

use qps_core::QpsError;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NOT_SYMPLECTIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    NotSymplectic(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::NotSymplectic(_) => EXIT_NOT_SYMPLECTIC,
            CliError::Numerical(_) => EXIT_CHECK_FAILED,
        }
    }
}

impl From<QpsError> for CliError {
    /// Input-shaped errors are configuration errors; the rest are failures
    /// of the computation itself.
    fn from(e: QpsError) -> Self {
        match e {
            QpsError::NotSymplectic { .. } => CliError::NotSymplectic(e.to_string()),
            QpsError::Parse(_)
            | QpsError::InvalidScales(_)
            | QpsError::InvalidSignature(_)
            | QpsError::InvalidState(_)
            | QpsError::InvalidArgument(_)
            | QpsError::DimensionMismatch(_)
            | QpsError::IndexOutOfRange { .. }
            | QpsError::ConicNoRealRoot { .. }
            | QpsError::InsufficientPoints(_)
            | QpsError::NonPositiveValue { .. }
            | QpsError::NormTooLarge { .. }
            | QpsError::NonPositiveVariance(_)
            | QpsError::ZeroScale => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
