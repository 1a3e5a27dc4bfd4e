// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>

namespace sparseglu::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kFormatError = 3,
  kInternalError = 4,
};

/// Entry point for the `sparseglu` binary. Subcommands: gen-model, sweep, heatmap,
/// critical, kde, trend, flops, bench. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sparseglu::cli
