// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparseglu/glu_ffn.hpp"
#include "sparseglu/sparsify.hpp"
#include "sparseglu/tiny_lm.hpp"

namespace sparseglu {

/// One sample of a sparsity-performance curve. The metric is greedy top-1 accuracy;
/// normalized_metric = raw_metric / dense_metric.
struct SweepPoint {
  double p_threshold = 0.0;
  double induced_sparsity = 0.0;
  double raw_metric = 0.0;
  double normalized_metric = 0.0;
};

struct SweepCurve {
  ActivationSite site = ActivationSite::Intermediate;
  RuleKind rule = RuleKind::TopP;
  std::vector<SweepPoint> points;  // ascending threshold
  double dense_metric = 0.0;
};

/// Per-layer mean induced sparsity, one row per threshold.
struct LayerHeatmap {
  std::vector<double> thresholds;
  std::size_t layers = 0;
  std::vector<double> sparsity;  // [thresholds x layers], row-major
  std::vector<double> metric_per_threshold;

  double at(std::size_t threshold_index, std::size_t layer) const {
    return sparsity.at(threshold_index * layers + layer);
  }
};

/// TopP/MaxP: {0, .5, .6, .7, .8, .85, .9, .925, .95, .975, .99, 1}.
/// TopK: round(f * activation_len) over the same fractions, deduplicated.
std::vector<double> default_threshold_grid(RuleKind kind, std::size_t activation_len);

/// Throws InputError when the threshold is outside the rule's domain.
SparsifyRule rule_for_threshold(RuleKind kind, double threshold);

struct SweepOptions {
  unsigned threads = 1;  // threshold runs execute concurrently; results keep threshold order
};

/// Everything one sweep measures: the dense baseline and one eval per threshold.
struct ThresholdStudy {
  SweepCurve curve;
  LayerHeatmap heatmap;
  EvalReport dense;
  std::vector<EvalReport> reports;  // aligned with curve.points
};

/// Thresholds are sorted ascending; duplicates, an empty list, out-of-domain values and a
/// zero dense metric (normalization undefined) raise InputError.
ThresholdStudy run_threshold_study(const TinyLm& model, std::span<const Token> data, ActivationSite site,
                                   RuleKind rule, std::span<const double> thresholds,
                                   const SweepOptions& options = {});

SweepCurve sweep(const TinyLm& model, std::span<const Token> data, ActivationSite site, RuleKind rule,
                 std::span<const double> thresholds, const SweepOptions& options = {});

LayerHeatmap layer_threshold_heatmap(const TinyLm& model, std::span<const Token> data, ActivationSite site,
                                     RuleKind rule, std::span<const double> thresholds,
                                     const SweepOptions& options = {});

}  // namespace sparseglu
