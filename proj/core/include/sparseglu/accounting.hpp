// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string_view>

#include "sparseglu/glu_ffn.hpp"

namespace sparseglu {

enum class SkipMode {
  ValueBased,       // mask derived from computed activation values
  OraclePredictor,  // intermediate mask known before any projection runs
};

std::string_view to_string(SkipMode m) noexcept;
SkipMode parse_skip_mode(std::string_view text);

/// Per-token cost of one GLU FFN under a skipping scheme. MACs are multiply-accumulate
/// pairs in the three projections; the elementwise product and the activation function
/// are reported separately (d ops each). Weight bytes are 4 per touched f32 weight.
struct MacCount {
  double macs = 0.0;
  double dense_macs = 0.0;
  double elementwise_ops = 0.0;
  double activation_ops = 0.0;
  double weight_bytes = 0.0;
  double dense_weight_bytes = 0.0;

  double savings() const noexcept { return dense_macs > 0.0 ? (dense_macs - macs) / dense_macs : 0.0; }
};

/// Cost model, with h the hidden and d the intermediate dimension and s the sparsity:
///   dense                          3hd
///   ValueBased Input               (1-s) 2hd + hd
///   ValueBased Gate / Up           hd + (1-s) 2hd   (the selecting projection runs dense first)
///   ValueBased Intermediate        2hd + (1-s) hd
///   OraclePredictor Intermediate   (1-s) 3hd
/// Throws InputError for s outside [0,1] and for OraclePredictor on any other site.
MacCount ffn_mac_count(std::size_t h, std::size_t d, ActivationSite site, SkipMode mode, double s);

/// One-line description of the execution schedule the model assumes.
std::string_view schedule_description(ActivationSite site, SkipMode mode) noexcept;

}  // namespace sparseglu
