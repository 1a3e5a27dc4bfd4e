// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <string>
#include <thread>

#include "sparseglu/error.hpp"

namespace sparseglu {
namespace {

constexpr double kFractionGrid[] = {0.0, 0.5, 0.6, 0.7, 0.8, 0.85, 0.9, 0.925, 0.95, 0.975, 0.99, 1.0};

void run_tasks(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i; (i = next.fetch_add(1)) < count;) task(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<double> default_threshold_grid(RuleKind kind, std::size_t activation_len) {
  std::vector<double> grid;
  for (double f : kFractionGrid) {
    grid.push_back(kind == RuleKind::TopK ? std::round(f * static_cast<double>(activation_len)) : f);
  }
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

SparsifyRule rule_for_threshold(RuleKind kind, double threshold) {
  if (kind == RuleKind::TopK) {
    if (!(threshold >= 0.0) || threshold != std::floor(threshold) || threshold > 1e15) {
      throw InputError("top-k threshold must be a nonnegative integer, got " + std::to_string(threshold));
    }
    return SparsifyRule::top_k(static_cast<std::size_t>(threshold));
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw InputError("threshold " + std::to_string(threshold) + " is outside [0, 1]");
  }
  return kind == RuleKind::TopP ? SparsifyRule::top_p(threshold) : SparsifyRule::max_p(threshold);
}

ThresholdStudy run_threshold_study(const TinyLm& model, std::span<const Token> data, ActivationSite site,
                                   RuleKind rule, std::span<const double> thresholds,
                                   const SweepOptions& options) {
  if (thresholds.empty()) throw InputError("sweep: threshold list is empty");
  if (data.size() < 2) throw InputError("sweep: data must hold at least 2 tokens");
  std::vector<double> grid(thresholds.begin(), thresholds.end());
  std::sort(grid.begin(), grid.end());
  if (std::adjacent_find(grid.begin(), grid.end()) != grid.end()) {
    throw InputError("sweep: duplicate threshold in grid");
  }
  std::vector<SparsifyRule> rules;
  for (double t : grid) rules.push_back(rule_for_threshold(rule, t));
  if (rule == RuleKind::TopK) {
    const auto len = site == ActivationSite::Input ? model.manifest().hidden_dim : model.manifest().intermediate_dim;
    if (rules.back().k > len) {
      throw InputError("sweep: top-k threshold " + std::to_string(rules.back().k) + " exceeds activation length " +
                       std::to_string(len));
    }
  }

  ThresholdStudy study;
  study.reports.resize(grid.size());
  // Task 0 is the dense baseline; task i+1 evaluates grid[i].
  run_tasks(grid.size() + 1, options.threads, [&](std::size_t task) {
    if (task == 0) {
      study.dense = eval_metrics(model, data, std::nullopt);
    } else {
      study.reports[task - 1] = eval_metrics(model, data, SparsifySpec{site, rules[task - 1]});
    }
  });

  const double dense_metric = study.dense.top1_accuracy;
  if (dense_metric <= 0.0) {
    throw InputError("sweep: dense top-1 accuracy is zero, normalized metric is undefined");
  }
  study.curve.site = site;
  study.curve.rule = rule;
  study.curve.dense_metric = dense_metric;

  const auto layers = model.manifest().n_layers;
  study.heatmap.thresholds = grid;
  study.heatmap.layers = layers;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& rep = study.reports[i];
    study.curve.points.push_back({grid[i], rep.avg_induced_sparsity, rep.top1_accuracy, rep.top1_accuracy / dense_metric});
    study.heatmap.sparsity.insert(study.heatmap.sparsity.end(), rep.per_layer_sparsity.begin(),
                                  rep.per_layer_sparsity.end());
    study.heatmap.metric_per_threshold.push_back(rep.top1_accuracy);
  }
  return study;
}

SweepCurve sweep(const TinyLm& model, std::span<const Token> data, ActivationSite site, RuleKind rule,
                 std::span<const double> thresholds, const SweepOptions& options) {
  return run_threshold_study(model, data, site, rule, thresholds, options).curve;
}

LayerHeatmap layer_threshold_heatmap(const TinyLm& model, std::span<const Token> data, ActivationSite site,
                                     RuleKind rule, std::span<const double> thresholds,
                                     const SweepOptions& options) {
  return run_threshold_study(model, data, site, rule, thresholds, options).heatmap;
}

}  // namespace sparseglu
