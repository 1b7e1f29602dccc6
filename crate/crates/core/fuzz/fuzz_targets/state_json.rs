// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qps_core::qpstate::QpsState;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(state) = QpsState::from_json_str(text) {
        // anything accepted must survive a round trip
        let again = QpsState::from_json_str(&state.to_json_string()).expect("re-parse");
        assert_eq!(again.cov().matrix(), state.cov().matrix());
    }
});
