// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qps_core::qpstate::ScaleConfig;
use serde::Serialize;

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Reduced Planck constant.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub hbar: f64,
    /// Minimal length scale.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub ell: f64,
    /// Maximal length scale.
    #[arg(long = "L", id = "L", global = true, default_value_t = 2.0)]
    pub big_l: f64,
    #[arg(long, global = true, env = "QPS_SEED", default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Random trials per suite.
    #[arg(long, global = true, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Replaces the tolerance of every check.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

/// Validated run configuration, echoed into every report.
#[derive(Debug, Clone, Serialize)]
pub struct CliConfig {
    pub hbar: f64,
    pub ell: f64,
    #[serde(rename = "L")]
    pub big_l: f64,
    pub seed: u64,
    pub trials: usize,
    pub tol: Option<f64>,
    pub output_format: OutputFormat,
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    scales: ScaleConfig,
}

impl CliConfig {
    pub fn from_args(args: &GlobalArgs) -> Result<Self, CliError> {
        let scales = ScaleConfig::new(args.hbar, args.ell, args.big_l)
            .map_err(|e| CliError::Config(e.to_string()))?;
        if args.trials < 1 {
            return Err(CliError::Config("trials must be ≥ 1".into()));
        }
        if let Some(tol) = args.tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!("tol must be > 0, got {tol}")));
            }
        }
        Ok(CliConfig {
            hbar: args.hbar,
            ell: args.ell,
            big_l: args.big_l,
            seed: args.seed,
            trials: args.trials,
            tol: args.tol,
            output_format: args.format,
            output_path: args.out.clone(),
            scales,
        })
    }

    pub fn scales(&self) -> &ScaleConfig {
        &self.scales
    }

    /// The check tolerance: `--tol` when given, otherwise `default`.
    pub fn tol_or(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }
}
