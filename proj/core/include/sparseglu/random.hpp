// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparseglu/tensor.hpp"

namespace sparseglu {

/// SplitMix64 (Steele, Lea & Flood). State advances by 0x9E3779B97F4A7C15; output mixes
/// with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB and shifts 30/27/31.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double next_unit() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller, cosine branch only: consumes exactly two draws.
  double next_normal() noexcept;

 private:
  std::uint64_t state_;
};

/// Deterministic tensor with entries scale * N(0, 1), drawn in row-major order.
Tensor seeded_tensor(std::uint64_t seed, std::vector<std::uint64_t> dims, float scale,
                     std::string name = {});

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace sparseglu
