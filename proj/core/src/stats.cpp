// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "sparseglu/error.hpp"

namespace sparseglu {

CriticalSparsity critical_sparsity(const SweepCurve& curve, double retention) {
  if (!(retention > 0.0 && retention <= 1.0)) throw InputError("critical_sparsity: retention must lie in (0, 1]");
  if (curve.points.empty()) throw InputError("critical_sparsity: empty curve");
  CriticalSparsity out;
  out.retention_threshold = retention;
  const SweepPoint* best = nullptr;
  for (const auto& pt : curve.points) {
    if (pt.normalized_metric >= retention && (best == nullptr || pt.induced_sparsity > best->induced_sparsity)) {
      best = &pt;
    }
  }
  if (best == nullptr) {
    out.synthetic = true;
    out.source_point = {std::numeric_limits<double>::quiet_NaN(), 0.0, curve.dense_metric, 1.0};
    out.value = 0.0;
  } else {
    out.source_point = *best;
    out.value = best->induced_sparsity;
  }
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InputError("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) throw InputError("sample_std: need at least 2 values");
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double quantile(std::span<const double> xs, double q) {
  if (xs.empty()) throw InputError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw InputError("quantile: q must lie in [0, 1]");
  std::vector<double> s(xs.begin(), xs.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double silverman_bandwidth(std::span<const double> xs) {
  if (xs.size() < 2) throw InputError("silverman_bandwidth: need at least 2 values");
  for (double x : xs) {
    if (!std::isfinite(x)) throw InputError("silverman_bandwidth: non-finite value");
  }
  const double sd = sample_std(xs);
  if (!(sd > 0.0)) throw InputError("silverman_bandwidth: data has zero spread");
  const double iqr = quantile(xs, 0.75) - quantile(xs, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  return 0.9 * spread * std::pow(static_cast<double>(xs.size()), -0.2);
}

std::vector<double> gaussian_kde(std::span<const double> xs, double bandwidth, std::span<const double> grid) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InputError("gaussian_kde: bandwidth must be positive");
  if (xs.empty()) throw InputError("gaussian_kde: empty sample");
  if (!std::is_sorted(grid.begin(), grid.end())) throw InputError("gaussian_kde: grid must be ascending");
  const double norm = 1.0 / (static_cast<double>(xs.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : xs) {
      const double z = (grid[g] - x) / bandwidth;
      acc += std::exp(-0.5 * z * z);
    }
    out[g] = norm * acc;
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw InputError("linspace: need at least 2 points");
  std::vector<double> out(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("trapezoid: x and y lengths differ");
  double area = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) area += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return area;
}

TrendFit ols_trend(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("ols_trend: x and y lengths differ");
  if (x.size() < 2) throw InputError("ols_trend: need at least 2 points");
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InputError("ols_trend: x has zero variance");
  TrendFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - fit.intercept - fit.slope * x[i];
    fit.residual_sum_of_squares += r * r;
  }
  fit.n_points = x.size();
  return fit;
}

}  // namespace sparseglu
