// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "sparseglu/accounting.hpp"
#include "sparseglu/tiny_lm.hpp"

namespace sparseglu::cli {

struct BenchConfig {
  ActivationSite site = ActivationSite::Intermediate;
  SparsifyRule rule;
  SkipMode mode = SkipMode::ValueBased;
  unsigned repeats = 3;
  std::size_t max_tokens = 4096;
};

struct BenchReport {
  std::uint64_t positions = 0;    // token positions replayed
  std::uint64_t evaluations = 0;  // FFN calls per pass (positions x layers)
  double measured_sparsity = 0.0;
  double dense_seconds = 0.0;     // best of `repeats`
  double sparse_seconds = 0.0;
  double dense_macs_per_token = 0.0;
  double measured_macs_per_token = 0.0;
  double predicted_macs_per_token = 0.0;
  double mac_relative_error = 0.0;
};

/// Replays the FFN inputs of a dense forward pass through the dense kernel and through
/// the skipping kernels, timing both and counting MACs with the instrumented kernels.
/// In OraclePredictor mode the intermediate masks are computed before timing starts.
BenchReport run_ffn_bench(const TinyLm& model, std::span<const Token> tokens, const BenchConfig& config);

}  // namespace sparseglu::cli
