// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "sparseglu/sparsify.hpp"
#include "sparseglu/tensor.hpp"

namespace sparseglu {

enum class Activation { SiLU, GELU };

std::string_view to_string(Activation a) noexcept;
Activation parse_activation(std::string_view text);

/// silu(z) = z * sigmoid(z); gelu(z) = z/2 * (1 + erf(z / sqrt 2)).
float activate(Activation a, float z) noexcept;

/// The four FFN activation vectors that can be sparsified.
enum class ActivationSite { Input, UpProjection, Gate, Intermediate };

std::string_view to_string(ActivationSite s) noexcept;
/// Accepts input|x, up|u|up_projection, gate|g, intermediate|inter|i.
ActivationSite parse_site(std::string_view text);

/// GLU feed-forward weights: y = W_down ((W_up x) * act(W_gate x)).
/// Stored as [out x in]: w_up and w_gate are [d x h], w_down is [h x d].
struct FfnWeights {
  Tensor w_up;
  Tensor w_gate;
  Tensor w_down;
  Activation activation = Activation::SiLU;

  std::size_t hidden_dim() const { return w_up.cols(); }
  std::size_t intermediate_dim() const { return w_up.rows(); }

  /// Throws ShapeError on inconsistent shapes, InputError on non-finite weights.
  void validate() const;
};

struct FfnTrace {
  SparsityMask mask;
  ActivationSite site = ActivationSite::Intermediate;
  double induced_sparsity = 0.0;
};

struct SparseFfnResult {
  std::vector<float> output;
  FfnTrace trace;
};

/// Standalone FFN container: exactly "ffn.w_up" [d x h], "ffn.w_gate" [d x h] and
/// "ffn.w_down" [h x d], in any order. h and d are read from w_down. Throws SchemaError
/// naming the missing, duplicated, unexpected or mis-shaped tensor.
FfnWeights ffn_from_tensors(std::vector<Tensor> tensors, Activation activation);
std::vector<Tensor> ffn_to_tensors(const FfnWeights& w);

/// Length of the activation vector at `site` (h for Input, d otherwise).
std::size_t activation_length(const FfnWeights& w, ActivationSite site);

std::vector<float> ffn_dense(std::span<const float> x, const FfnWeights& w,
                             KernelCounters* counters = nullptr);

/// Masks the activation at `site` with `rule` and runs the FFN through the skipping kernels:
///   Input         - columns of W_up and W_gate skipped; W_down dense.
///   Gate          - gate computed densely; rows of W_up and columns of W_down skipped.
///   UpProjection  - up computed densely; rows of W_gate and columns of W_down skipped.
///   Intermediate  - up and gate dense; columns of W_down skipped.
/// The residual stream never sees the mask; only the FFN branch's copy of x does.
SparseFfnResult ffn_sparsified(std::span<const float> x, const FfnWeights& w, ActivationSite site,
                               const SparsifyRule& rule, KernelCounters* counters = nullptr);

/// Predictor-style execution with an intermediate mask known ahead of time: rows of
/// W_up and W_gate and columns of W_down are skipped for every dropped neuron.
std::vector<float> ffn_with_intermediate_mask(std::span<const float> x, const FfnWeights& w,
                                              const SparsityMask& mask,
                                              KernelCounters* counters = nullptr);

/// Computes y[i] over the kept columns only, in ascending column order. Bitwise equal to
/// gemv(w, apply_mask(x, mask)) for finite inputs.
std::vector<float> gemv_skip_cols(MatrixView w, std::span<const float> x, const SparsityMask& mask,
                                  KernelCounters* counters = nullptr);

/// Computes only the kept output rows; dropped rows are exactly 0.0f.
std::vector<float> gemv_skip_rows(MatrixView w, std::span<const float> x, const SparsityMask& row_mask,
                                  KernelCounters* counters = nullptr);

}  // namespace sparseglu
