// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Relativistic quantum phase space of signature (1,4).
//!
//! * [`numerics`]: dense matrix kernel, matrix exponential, seeded RNG.
//! * [`sympgroup`]: metric, symplectic form, `Sp(2N₊,2N₋)` and its de Sitter subgroup.
//! * [`qpstate`]: Gaussian states, the invariant `Γ` and saturation checks.
//! * [`geometry`]: the conic `Γ = L²/ℓ²`, its two limits and the Fourier duality.

// `!(x <= tol)` is how NaN measurements are rejected throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod numerics;
pub mod qpstate;
pub mod sympgroup;

pub use error::{QpsError, Result};
