// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "sparseglu/error.hpp"

namespace sparseglu::cli {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double best_of(unsigned repeats, Fn&& fn) {
  double best = std::numeric_limits<double>::infinity();
  for (unsigned r = 0; r < std::max(1u, repeats); ++r) {
    const auto t0 = Clock::now();
    fn(r);
    const std::chrono::duration<double> dt = Clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

}  // namespace

BenchReport run_ffn_bench(const TinyLm& model, std::span<const Token> tokens, const BenchConfig& config) {
  if (config.mode == SkipMode::OraclePredictor && config.site != ActivationSite::Intermediate) {
    throw InputError("bench: oracle-predictor mode requires the intermediate site");
  }
  config.rule.validate();
  const auto& m = model.manifest();
  tokens = tokens.first(std::min(tokens.size(), config.max_tokens));
  if (tokens.size() < 2) throw InputError("bench: data must hold at least 2 tokens");

  // FFN inputs per layer, captured from a dense forward pass.
  std::vector<std::vector<float>> inputs(m.n_layers);
  ForwardHooks hooks;
  hooks.on_ffn_input = [&](std::size_t layer, std::size_t, std::span<const float> x) {
    inputs[layer].insert(inputs[layer].end(), x.begin(), x.end());
  };
  for (std::size_t begin = 0; begin < tokens.size(); begin += m.max_seq_len) {
    const auto len = std::min(m.max_seq_len, tokens.size() - begin);
    forward_logits(model, tokens.subspan(begin, len), std::nullopt, &hooks);
  }
  const std::size_t h = m.hidden_dim;
  const std::size_t positions = inputs[0].size() / h;
  auto input = [&](std::size_t layer, std::size_t pos) {
    return std::span<const float>(inputs[layer]).subspan(pos * h, h);
  };

  std::vector<std::vector<SparsityMask>> oracle_masks;
  if (config.mode == SkipMode::OraclePredictor) {
    oracle_masks.resize(m.n_layers);
    for (std::size_t l = 0; l < m.n_layers; ++l) {
      for (std::size_t p = 0; p < positions; ++p) {
        oracle_masks[l].push_back(
            ffn_sparsified(input(l, p), model.layer(l).ffn, ActivationSite::Intermediate, config.rule).trace.mask);
      }
    }
  }

  float sink = 0.0f;
  KernelCounters dense_counters;
  const double dense_seconds = best_of(config.repeats, [&](unsigned r) {
    for (std::size_t l = 0; l < m.n_layers; ++l) {
      for (std::size_t p = 0; p < positions; ++p) {
        sink += ffn_dense(input(l, p), model.layer(l).ffn, r == 0 ? &dense_counters : nullptr)[0];
      }
    }
  });

  KernelCounters sparse_counters;
  std::uint64_t dropped = 0, entries = 0;
  const double sparse_seconds = best_of(config.repeats, [&](unsigned r) {
    KernelCounters* counters = r == 0 ? &sparse_counters : nullptr;
    for (std::size_t l = 0; l < m.n_layers; ++l) {
      const auto& ffn = model.layer(l).ffn;
      for (std::size_t p = 0; p < positions; ++p) {
        if (config.mode == SkipMode::OraclePredictor) {
          const auto& mask = oracle_masks[l][p];
          sink += ffn_with_intermediate_mask(input(l, p), ffn, mask, counters)[0];
          if (r == 0) {
            dropped += mask.size() - mask.kept_count();
            entries += mask.size();
          }
        } else {
          auto res = ffn_sparsified(input(l, p), ffn, config.site, config.rule, counters);
          sink += res.output[0];
          if (r == 0) {
            dropped += res.trace.mask.size() - res.trace.mask.kept_count();
            entries += res.trace.mask.size();
          }
        }
      }
    }
  });
  if (!std::isfinite(sink)) throw Error("bench: non-finite FFN output");

  BenchReport rep;
  rep.positions = positions;
  rep.evaluations = positions * m.n_layers;
  rep.measured_sparsity = static_cast<double>(dropped) / static_cast<double>(entries);
  rep.dense_seconds = dense_seconds;
  rep.sparse_seconds = sparse_seconds;
  const auto pos = static_cast<double>(positions);
  rep.dense_macs_per_token = static_cast<double>(dense_counters.macs) / pos;
  rep.measured_macs_per_token = static_cast<double>(sparse_counters.macs) / pos;
  rep.predicted_macs_per_token =
      static_cast<double>(m.n_layers) *
      ffn_mac_count(h, m.intermediate_dim, config.site, config.mode, rep.measured_sparsity).macs;
  const double diff = std::fabs(rep.measured_macs_per_token - rep.predicted_macs_per_token);
  rep.mac_relative_error = rep.predicted_macs_per_token > 0.0 ? diff / rep.predicted_macs_per_token
                           : diff == 0.0                      ? 0.0
                                                              : std::numeric_limits<double>::infinity();
  return rep;
}

}  // namespace sparseglu::cli
