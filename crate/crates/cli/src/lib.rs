// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end for `qps-core`.
//!
//! Exit codes: 0 pass, 1 a check failed, 2 configuration or parse error,
//! 3 an LCT input failed the membership gate.

// `!(x <= tol)` is how NaN measurements are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use qps_core::qpstate::gaussian::QuadratureConfig;

use crate::commands::{
    run_gaussian, run_sample, run_sweep, run_transform, GaussianRequest, Outcome, SweepAxis,
    SweepRequest, ThetaPolicy,
};
use crate::config::{CliConfig, GlobalArgs, OutputFormat};
use crate::error::{CliError, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(
    name = "qps",
    version,
    about = "Relativistic quantum phase space toolkit"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every invariant suite and report one line per check.
    Verify,
    /// Residual of a limit equation against ℓ (or 1/L), with the fitted order.
    Sweep {
        #[arg(value_enum)]
        axis: SweepAxis,
        /// Momentum mean held fixed in the ℓ sweep.
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Coordinate mean held fixed in the L sweep.
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        /// Report absolute instead of relative residuals.
        #[arg(long)]
        absolute: bool,
    },
    /// Canonical states on the conic, one JSON object per line.
    Sample {
        #[arg(long, default_value_t = 3)]
        count: usize,
        #[arg(long, value_enum, default_value_t = ThetaPolicy::Even)]
        theta_policy: ThetaPolicy,
    },
    /// Apply an LCT file to a state file.
    Transform { state: PathBuf, lct: PathBuf },
    /// Quadrature moments of a single-axis Gaussian wavepacket.
    Gaussian {
        /// Position variance; defaults to L².
        #[arg(long)]
        x_var: Option<f64>,
        /// Cross covariance; defaults to (ħ/2ℓ)√(L²−ℓ²).
        #[arg(long)]
        q: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        x_mean: f64,
        #[arg(long, default_value_t = 0.0)]
        p_mean: f64,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long, default_value_t = 10.0)]
        window: f64,
    },
}

fn dispatch(cli: &Cli, config: &CliConfig) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Verify => {
            let report = verify::run_verify(config);
            let output = match config.output_format {
                OutputFormat::Json => {
                    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
                    s.push('\n');
                    s
                }
                OutputFormat::Csv => report.to_csv(),
            };
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {:e} > {:e}", c.name, c.max_error, c.tolerance);
            }
            Ok(Outcome {
                output,
                exit_code: if report.overall_pass { 0 } else { 1 },
            })
        }
        Command::Sweep {
            axis,
            kappa,
            lambda,
            points,
            min,
            max,
            absolute,
        } => run_sweep(
            config,
            &SweepRequest {
                axis: *axis,
                kappa: *kappa,
                lambda: *lambda,
                points: *points,
                min: *min,
                max: *max,
                absolute: *absolute,
            },
        ),
        Command::Sample {
            count,
            theta_policy,
        } => run_sample(config, *count, *theta_policy),
        Command::Transform { state, lct } => run_transform(config, state, lct),
        Command::Gaussian {
            x_var,
            q,
            x_mean,
            p_mean,
            nodes,
            window,
        } => run_gaussian(
            config,
            &GaussianRequest {
                x_var: *x_var,
                q: *q,
                x_mean: *x_mean,
                p_mean: *p_mean,
                quad: QuadratureConfig {
                    node_count: *nodes,
                    window_sigmas: *window,
                },
            },
        ),
    }
}

fn emit(config: &CliConfig, output: &str) -> Result<(), CliError> {
    match &config.output_path {
        Some(path) => fs::write(path, output)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Config(format!("stdout: {e}")))
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let config = match CliConfig::from_args(&cli.global) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = dispatch(&cli, &config).and_then(|outcome| {
        emit(&config, &outcome.output)?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
