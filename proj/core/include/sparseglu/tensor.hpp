// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace sparseglu {

/// Dense f32 tensor, row-major. Matrices are stored [out_dim x in_dim] so that y = W x.
class Tensor {
 public:
  Tensor() = default;
  /// Zero-filled tensor.
  Tensor(std::string name, std::vector<std::uint64_t> dims);
  Tensor(std::string name, std::vector<std::uint64_t> dims, std::vector<float> data);

  const std::string& name() const noexcept { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  const std::vector<std::uint64_t>& dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t numel() const noexcept { return data_.size(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  /// Row count of a rank-2 tensor. Throws ShapeError otherwise.
  std::size_t rows() const;
  std::size_t cols() const;

  bool all_finite() const noexcept;

  /// Bitwise comparison of name, dims and payload.
  bool bit_equal(const Tensor& other) const noexcept;

 private:
  std::string name_;
  std::vector<std::uint64_t> dims_;
  std::vector<float> data_;
};

/// Non-owning read-only view of a row-major matrix.
struct MatrixView {
  std::span<const float> data;
  std::size_t rows = 0;
  std::size_t cols = 0;

  MatrixView() = default;
  MatrixView(std::span<const float> d, std::size_t r, std::size_t c);
  explicit MatrixView(const Tensor& t);

  float operator()(std::size_t i, std::size_t j) const noexcept { return data[i * cols + j]; }
  std::span<const float> row(std::size_t i) const noexcept { return data.subspan(i * cols, cols); }
};

/// Work counters filled by the instrumented kernels.
struct KernelCounters {
  std::uint64_t macs = 0;
  std::uint64_t weight_loads = 0;

  KernelCounters& operator+=(const KernelCounters& o) noexcept {
    macs += o.macs;
    weight_loads += o.weight_loads;
    return *this;
  }
};

/// y[i] = sum_j W[i,j] * x[j], f32 accumulation in ascending j.
std::vector<float> gemv(MatrixView w, std::span<const float> x, KernelCounters* counters = nullptr);
void gemv_into(MatrixView w, std::span<const float> x, std::span<float> out,
               KernelCounters* counters = nullptr);

/// C = A * B for row-major A [m x k] and B [k x n], ascending-k accumulation per entry.
std::vector<float> gemm(MatrixView a, MatrixView b);

std::uint64_t product(std::span<const std::uint64_t> dims) noexcept;

}  // namespace sparseglu
