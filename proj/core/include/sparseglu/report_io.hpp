// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sparseglu/harness.hpp"
#include "sparseglu/stats.hpp"

namespace sparseglu {

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);
/// Throws FormatError on text that is not a complete number.
double parse_number(std::string_view text);

/// Columns: site,rule,p,induced_sparsity,raw_metric,normalized_metric
std::string sweep_csv(const SweepCurve& curve);
/// Reads a sweep CSV back. dense_metric is recovered as raw / normalized from the first
/// point with a nonzero normalized metric. Throws FormatError on malformed input.
SweepCurve parse_sweep_csv(std::string_view text);

/// Columns: p,layer,sparsity
std::string heatmap_csv(const LayerHeatmap& heatmap);

/// Columns: site,rule,retention,critical_sparsity,p,normalized_metric
/// (p is empty for a synthetic dense point).
std::string critical_csv(const SweepCurve& curve, std::span<const CriticalSparsity> results);

/// Columns: grid,density
std::string kde_csv(std::span<const double> grid, std::span<const double> density);

/// {"slope","intercept","rss","n"}
std::string trend_json(const TrendFit& fit);

/// Values of one named column in a headered CSV.
std::vector<double> read_csv_column(std::string_view text, std::string_view column);

/// Provenance record written next to every sweep/heatmap output. Its flat keys double as
/// CLI flags, so the file can be fed back through --config to reproduce the run.
struct RunManifest {
  std::string command;
  std::string model;
  std::string manifest;
  std::string data;
  std::string model_sha256;
  std::string manifest_sha256;
  std::string data_sha256;
  std::string site;
  std::string rule;
  std::vector<double> thresholds;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string metric = "top1_accuracy";
  double dense_metric = 0.0;
  std::optional<double> critical_sparsity_099;
  std::vector<double> metric_per_threshold;
};

std::string run_manifest_json(const RunManifest& m);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sparseglu
