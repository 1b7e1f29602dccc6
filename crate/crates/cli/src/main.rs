// Copyright 2026 The qps Authors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

fn main() {
    let cli = qps_cli::Cli::parse();
    std::process::exit(qps_cli::run(cli));
}
