// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

//! Input: state JSON, a NUL byte, then LCT JSON.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qps_core::qpstate::{gamma_invariant, transform_state, QpsState};
use qps_core::sympgroup::LctMatrix;

fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let (Ok(state_text), Ok(lct_text)) = (
        std::str::from_utf8(&data[..split]),
        std::str::from_utf8(&data[split + 1..]),
    ) else {
        return;
    };
    let (Ok(state), Ok((_, lct))) = (
        QpsState::from_json_str(state_text),
        LctMatrix::from_json_str(lct_text),
    ) else {
        return;
    };
    if let Ok(image) = transform_state(&state, &lct) {
        let _ = gamma_invariant(&image);
    }
});
