// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>

#include "sparseglu/error.hpp"

namespace sparseglu {

std::uint64_t product(std::span<const std::uint64_t> dims) noexcept {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

Tensor::Tensor(std::string name, std::vector<std::uint64_t> dims)
    : name_(std::move(name)), dims_(std::move(dims)) {
  if (dims_.empty()) throw ShapeError("tensor '" + name_ + "' has rank 0");
  for (auto d : dims_) {
    if (d == 0) throw ShapeError("tensor '" + name_ + "' has a zero dimension");
  }
  data_.assign(product(dims_), 0.0f);
}

Tensor::Tensor(std::string name, std::vector<std::uint64_t> dims, std::vector<float> data)
    : name_(std::move(name)), dims_(std::move(dims)), data_(std::move(data)) {
  if (dims_.empty()) throw ShapeError("tensor '" + name_ + "' has rank 0");
  for (auto d : dims_) {
    if (d == 0) throw ShapeError("tensor '" + name_ + "' has a zero dimension");
  }
  if (product(dims_) != data_.size()) {
    throw ShapeError("tensor '" + name_ + "': dims describe " + std::to_string(product(dims_)) +
                     " elements but data holds " + std::to_string(data_.size()));
  }
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw ShapeError("tensor '" + name_ + "' is not a matrix");
  return dims_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw ShapeError("tensor '" + name_ + "' is not a matrix");
  return dims_[1];
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

bool Tensor::bit_equal(const Tensor& other) const noexcept {
  return name_ == other.name_ && dims_ == other.dims_ && data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(float)) == 0;
}

MatrixView::MatrixView(std::span<const float> d, std::size_t r, std::size_t c)
    : data(d), rows(r), cols(c) {
  if (d.size() != r * c) throw ShapeError("matrix view size does not match rows*cols");
}

MatrixView::MatrixView(const Tensor& t) : MatrixView(t.data(), t.rows(), t.cols()) {}

void gemv_into(MatrixView w, std::span<const float> x, std::span<float> out,
               KernelCounters* counters) {
  if (w.cols != x.size()) {
    throw ShapeError("gemv: matrix has " + std::to_string(w.cols) + " columns, vector has " +
                     std::to_string(x.size()) + " entries");
  }
  if (w.rows != out.size()) throw ShapeError("gemv: output length does not match matrix rows");
  for (std::size_t i = 0; i < w.rows; ++i) {
    const float* row = w.data.data() + i * w.cols;
    float acc = 0.0f;
    for (std::size_t j = 0; j < w.cols; ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  if (counters != nullptr) {
    counters->macs += w.rows * w.cols;
    counters->weight_loads += w.rows * w.cols;
  }
}

std::vector<float> gemv(MatrixView w, std::span<const float> x, KernelCounters* counters) {
  std::vector<float> out(w.rows);
  gemv_into(w, x, out, counters);
  return out;
}

std::vector<float> gemm(MatrixView a, MatrixView b) {
  if (a.cols != b.rows) throw ShapeError("gemm: inner dimensions differ");
  std::vector<float> c(a.rows * b.cols, 0.0f);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      float acc = 0.0f;
      for (std::size_t k = 0; k < a.cols; ++k) acc += a(i, k) * b(k, j);
      c[i * b.cols + j] = acc;
    }
  }
  return c;
}

}  // namespace sparseglu
