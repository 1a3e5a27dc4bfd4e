// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sparseglu/harness.hpp"

namespace sparseglu {

struct CriticalSparsity {
  double value = 0.0;
  double retention_threshold = 0.99;
  SweepPoint source_point;
  bool synthetic = false;  // no point qualified; source_point is the dense baseline
};

/// Highest induced sparsity among points whose normalized metric is >= retention. No
/// interpolation. When nothing qualifies the result is 0 from a synthetic dense point.
/// Throws InputError for retention outside (0, 1] or an empty curve.
CriticalSparsity critical_sparsity(const SweepCurve& curve, double retention = 0.99);

double mean(std::span<const double> xs);
/// Sample standard deviation (n - 1 denominator).
double sample_std(std::span<const double> xs);
/// Linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::span<const double> xs, double q);

/// Silverman's rule of thumb: 0.9 * min(std, IQR / 1.34) * n^(-1/5). Falls back to the
/// standard deviation when the IQR is zero. Throws InputError for n < 2 or zero spread.
double silverman_bandwidth(std::span<const double> xs);

/// f(g) = 1/(n h) * sum_i phi((g - x_i) / h).
std::vector<double> gaussian_kde(std::span<const double> xs, double bandwidth, std::span<const double> grid);

std::vector<double> linspace(double lo, double hi, std::size_t n);
double trapezoid(std::span<const double> x, std::span<const double> y);

struct TrendFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_sum_of_squares = 0.0;
  std::size_t n_points = 0;
};

/// Simple least-squares line y = intercept + slope * x.
TrendFit ols_trend(std::span<const double> x, std::span<const double> y);

}  // namespace sparseglu
