// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/random.hpp"

#include <cmath>
#include <numbers>

namespace sparseglu {

double SplitMix64::next_normal() noexcept {
  const double u1 = 1.0 - next_unit();  // (0, 1]
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Tensor seeded_tensor(std::uint64_t seed, std::vector<std::uint64_t> dims, float scale,
                     std::string name) {
  Tensor t(std::move(name), std::move(dims));
  if (scale == 0.0f) return t;
  SplitMix64 rng(seed);
  for (float& v : t.data()) v = static_cast<float>(static_cast<double>(scale) * rng.next_normal());
  return t;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  SplitMix64 rng(base ^ (stream * 0xD1B54A32D192ED03ULL));
  return rng.next();
}

}  // namespace sparseglu
