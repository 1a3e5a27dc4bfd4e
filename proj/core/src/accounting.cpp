// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/accounting.hpp"

#include <string>

#include "sparseglu/error.hpp"

namespace sparseglu {

std::string_view to_string(SkipMode m) noexcept {
  return m == SkipMode::ValueBased ? "value" : "oracle";
}

SkipMode parse_skip_mode(std::string_view text) {
  if (text == "value" || text == "value-based" || text == "valuebased") return SkipMode::ValueBased;
  if (text == "oracle" || text == "oracle-predictor" || text == "predictor") return SkipMode::OraclePredictor;
  throw ConfigError("unknown skip mode '" + std::string(text) + "' (expected value or oracle)");
}

MacCount ffn_mac_count(std::size_t h, std::size_t d, ActivationSite site, SkipMode mode, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InputError("ffn_mac_count: sparsity must lie in [0, 1]");
  if (mode == SkipMode::OraclePredictor && site != ActivationSite::Intermediate) {
    throw InputError("ffn_mac_count: oracle-predictor mode applies to the intermediate site only");
  }
  const double hd = static_cast<double>(h) * static_cast<double>(d);
  const double keep = 1.0 - s;

  MacCount c;
  c.dense_macs = 3.0 * hd;
  c.elementwise_ops = static_cast<double>(d);
  c.activation_ops = static_cast<double>(d);
  if (mode == SkipMode::OraclePredictor) {
    c.macs = keep * 3.0 * hd;
  } else {
    switch (site) {
      case ActivationSite::Input: c.macs = keep * 2.0 * hd + hd; break;
      case ActivationSite::Gate:
      case ActivationSite::UpProjection: c.macs = hd + keep * 2.0 * hd; break;
      case ActivationSite::Intermediate: c.macs = 2.0 * hd + keep * hd; break;
    }
  }
  c.weight_bytes = 4.0 * c.macs;
  c.dense_weight_bytes = 4.0 * c.dense_macs;
  return c;
}

std::string_view schedule_description(ActivationSite site, SkipMode mode) noexcept {
  if (mode == SkipMode::OraclePredictor) {
    return "intermediate mask predicted up front; rows of W_up and W_gate and columns of W_down skipped";
  }
  switch (site) {
    case ActivationSite::Input:
      return "columns of W_up and W_gate skipped for dropped inputs; W_down dense";
    case ActivationSite::Gate:
      return "gate computed dense first; rows of W_up and columns of W_down skipped";
    case ActivationSite::UpProjection:
      return "up projection computed dense first; rows of W_gate and columns of W_down skipped";
    case ActivationSite::Intermediate:
      return "W_up and W_gate dense; columns of W_down skipped for dropped intermediates";
  }
  return "";
}

}  // namespace sparseglu
