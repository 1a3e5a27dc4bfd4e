// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/report_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "sparseglu/error.hpp"

namespace sparseglu {
namespace {

constexpr std::string_view kSweepHeader = "site,rule,p,induced_sparsity,raw_metric,normalized_metric";

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Non-empty lines with their starting byte offsets; trailing '\r' stripped.
std::vector<std::pair<std::string_view, std::size_t>> lines_of(std::string_view text) {
  std::vector<std::pair<std::string_view, std::size_t>> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) out.emplace_back(line, start);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string format_number(double v) { return fmt::format("{}", v); }

double parse_number(std::string_view text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw FormatError("not a number: '" + std::string(text) + "'", 0);
  return v;
}

std::string sweep_csv(const SweepCurve& curve) {
  std::string out(kSweepHeader);
  out += '\n';
  for (const auto& pt : curve.points) {
    out += fmt::format("{},{},{},{},{},{}\n", to_string(curve.site), to_string(curve.rule),
                       format_number(pt.p_threshold), format_number(pt.induced_sparsity),
                       format_number(pt.raw_metric), format_number(pt.normalized_metric));
  }
  return out;
}

SweepCurve parse_sweep_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front().first != kSweepHeader) {
    throw FormatError("sweep CSV: header must be '" + std::string(kSweepHeader) + "'", 0);
  }
  SweepCurve curve;
  curve.dense_metric = std::nan("");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [line, offset] = lines[i];
    const auto f = split(line, ',');
    if (f.size() != 6) throw FormatError("sweep CSV: expected 6 fields", offset);
    try {
      const auto site = parse_site(f[0]);
      const auto rule = parse_rule_kind(f[1]);
      if (i == 1) {
        curve.site = site;
        curve.rule = rule;
      } else if (site != curve.site || rule != curve.rule) {
        throw FormatError("sweep CSV: rows mix sites or rules", offset);
      }
      SweepPoint pt{parse_number(f[2]), parse_number(f[3]), parse_number(f[4]), parse_number(f[5])};
      if (std::isnan(curve.dense_metric) && pt.normalized_metric != 0.0) {
        curve.dense_metric = pt.raw_metric / pt.normalized_metric;
      }
      curve.points.push_back(pt);
    } catch (const FormatError&) {
      throw;
    } catch (const Error& e) {
      throw FormatError(std::string("sweep CSV: ") + e.what(), offset);
    }
  }
  if (curve.points.empty()) throw FormatError("sweep CSV: no data rows", text.size());
  if (std::isnan(curve.dense_metric)) curve.dense_metric = 0.0;
  return curve;
}

std::string heatmap_csv(const LayerHeatmap& heatmap) {
  std::string out = "p,layer,sparsity\n";
  for (std::size_t t = 0; t < heatmap.thresholds.size(); ++t) {
    for (std::size_t l = 0; l < heatmap.layers; ++l) {
      out += fmt::format("{},{},{}\n", format_number(heatmap.thresholds[t]), l, format_number(heatmap.at(t, l)));
    }
  }
  return out;
}

std::string critical_csv(const SweepCurve& curve, std::span<const CriticalSparsity> results) {
  std::string out = "site,rule,retention,critical_sparsity,p,normalized_metric\n";
  for (const auto& r : results) {
    out += fmt::format("{},{},{},{},{},{}\n", to_string(curve.site), to_string(curve.rule),
                       format_number(r.retention_threshold), format_number(r.value),
                       r.synthetic ? std::string() : format_number(r.source_point.p_threshold),
                       format_number(r.source_point.normalized_metric));
  }
  return out;
}

std::string kde_csv(std::span<const double> grid, std::span<const double> density) {
  if (grid.size() != density.size()) throw ShapeError("kde_csv: grid and density lengths differ");
  std::string out = "grid,density\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += fmt::format("{},{}\n", format_number(grid[i]), format_number(density[i]));
  }
  return out;
}

std::string trend_json(const TrendFit& fit) {
  nlohmann::ordered_json doc = {
      {"slope", fit.slope},
      {"intercept", fit.intercept},
      {"rss", fit.residual_sum_of_squares},
      {"n", fit.n_points},
  };
  return doc.dump(2) + "\n";
}

std::vector<double> read_csv_column(std::string_view text, std::string_view column) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError("CSV: empty input", 0);
  const auto header = split(lines.front().first, ',');
  std::size_t col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) col = i;
  }
  if (col == header.size()) throw FormatError("CSV: no column named '" + std::string(column) + "'", 0);
  std::vector<double> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i].first, ',');
    if (f.size() != header.size()) throw FormatError("CSV: wrong field count", lines[i].second);
    try {
      out.push_back(parse_number(f[col]));
    } catch (const FormatError& e) {
      throw FormatError(e.what(), lines[i].second);
    }
  }
  return out;
}

std::string run_manifest_json(const RunManifest& m) {
  nlohmann::ordered_json doc = {
      {"command", m.command},
      {"model", m.model},
      {"manifest", m.manifest},
      {"data", m.data},
      {"model-sha256", m.model_sha256},
      {"manifest-sha256", m.manifest_sha256},
      {"data-sha256", m.data_sha256},
      {"site", m.site},
      {"rule", m.rule},
      {"thresholds", m.thresholds},
      {"seed", m.seed},
      {"threads", m.threads},
      {"metric", m.metric},
      {"dense_metric", m.dense_metric},
  };
  if (m.critical_sparsity_099) doc["critical_sparsity_099"] = *m.critical_sparsity_099;
  if (!m.metric_per_threshold.empty()) doc["metric_per_threshold"] = m.metric_per_threshold;
  return doc.dump(2) + "\n";
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

}  // namespace sparseglu
