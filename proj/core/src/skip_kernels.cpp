// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <string>

#include "sparseglu/error.hpp"
#include "sparseglu/glu_ffn.hpp"

namespace sparseglu {

std::vector<float> gemv_skip_cols(MatrixView w, std::span<const float> x, const SparsityMask& mask,
                                  KernelCounters* counters) {
  if (w.cols != x.size()) throw ShapeError("gemv_skip_cols: matrix columns do not match vector length");
  if (mask.size() != w.cols) {
    throw ShapeError("gemv_skip_cols: mask length " + std::to_string(mask.size()) +
                     " does not match input dimension " + std::to_string(w.cols));
  }
  const auto cols = mask.kept_indices();
  std::vector<float> out(w.rows);
  for (std::size_t i = 0; i < w.rows; ++i) {
    const float* row = w.data.data() + i * w.cols;
    float acc = 0.0f;
    for (auto j : cols) acc += row[j] * x[j];
    out[i] = acc;
  }
  if (counters != nullptr) {
    counters->macs += w.rows * cols.size();
    counters->weight_loads += w.rows * cols.size();
  }
  return out;
}

std::vector<float> gemv_skip_rows(MatrixView w, std::span<const float> x, const SparsityMask& row_mask,
                                  KernelCounters* counters) {
  if (w.cols != x.size()) throw ShapeError("gemv_skip_rows: matrix columns do not match vector length");
  if (row_mask.size() != w.rows) {
    throw ShapeError("gemv_skip_rows: mask length " + std::to_string(row_mask.size()) +
                     " does not match output dimension " + std::to_string(w.rows));
  }
  std::vector<float> out(w.rows, 0.0f);
  std::size_t computed = 0;
  for (std::size_t i = 0; i < w.rows; ++i) {
    if (!row_mask.kept(i)) continue;
    const float* row = w.data.data() + i * w.cols;
    float acc = 0.0f;
    for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    out[i] = acc;
    ++computed;
  }
  if (counters != nullptr) {
    counters->macs += computed * w.cols;
    counters->weight_loads += computed * w.cols;
  }
  return out;
}

}  // namespace sparseglu
