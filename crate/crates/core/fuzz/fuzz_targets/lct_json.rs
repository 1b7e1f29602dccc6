// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

#![no_main]

use libfuzzer_sys::fuzz_target;
use qps_core::sympgroup::LctMatrix;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok((scales, lct)) = LctMatrix::from_json_str(text) {
        let (_, again) = LctMatrix::from_json_str(&lct.to_json_string(&scales)).expect("re-parse");
        assert_eq!(again.matrix(), lct.matrix());
    }
});
