// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/sparsify.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "sparseglu/error.hpp"

namespace sparseglu {
namespace {

void require_finite(std::span<const float> v, const char* op) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw InputError(std::string(op) + ": non-finite activation at index " + std::to_string(i));
    }
  }
}

void require_fraction(double p, const char* op) {
  if (!(p >= 0.0 && p <= 1.0)) throw InputError(std::string(op) + ": p must lie in [0, 1]");
}

// Strict total order: larger magnitude first, lower index on ties.
struct ByMagnitude {
  std::span<const float> v;
  bool operator()(std::size_t a, std::size_t b) const noexcept {
    const float ma = std::fabs(v[a]);
    const float mb = std::fabs(v[b]);
    if (ma != mb) return ma > mb;
    return a < b;
  }
};

std::vector<std::size_t> magnitude_order(std::span<const float> v) {
  std::vector<std::size_t> order(v.size());
  if (v.size() <= 0xffffffffu) {
    // The bit pattern of a finite non-negative float is monotone in its value, so one integer
    // sort over (inverted magnitude bits, index) realizes ByMagnitude.
    std::vector<std::uint64_t> keys(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const auto bits = std::bit_cast<std::uint32_t>(std::fabs(v[i]));
      keys[i] = (std::uint64_t{~bits} << 32) | static_cast<std::uint64_t>(i);
    }
    std::sort(keys.begin(), keys.end());
    for (std::size_t i = 0; i < v.size(); ++i) order[i] = static_cast<std::size_t>(keys[i] & 0xffffffffu);
    return order;
  }
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), ByMagnitude{v});
  return order;
}

}  // namespace

SparsityMask SparsityMask::from_indices(std::size_t n, std::span<const std::size_t> kept) {
  SparsityMask m(n);
  for (auto i : kept) {
    if (i >= n) throw ShapeError("mask index out of range");
    m.set(i, true);
  }
  return m;
}

std::size_t SparsityMask::kept_count() const noexcept {
  return static_cast<std::size_t>(std::count(keep_.begin(), keep_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> SparsityMask::kept_indices() const {
  std::vector<std::size_t> out;
  out.reserve(keep_.size());
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (keep_[i]) out.push_back(i);
  }
  return out;
}

bool SparsityMask::subset_of(const SparsityMask& other) const noexcept {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < keep_.size(); ++i) {
    if (keep_[i] && !other.keep_[i]) return false;
  }
  return true;
}

std::string_view to_string(RuleKind kind) noexcept {
  switch (kind) {
    case RuleKind::TopP: return "topp";
    case RuleKind::TopK: return "topk";
    case RuleKind::MaxP: return "maxp";
  }
  return "?";
}

RuleKind parse_rule_kind(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (key == "topp") return RuleKind::TopP;
  if (key == "topk") return RuleKind::TopK;
  if (key == "maxp") return RuleKind::MaxP;
  throw ConfigError("unknown sparsification rule '" + std::string(text) + "' (expected topp, topk or maxp)");
}

void SparsifyRule::validate() const {
  if (kind != RuleKind::TopK) require_fraction(p, to_string(kind).data());
}

SparsityMask top_p_mask(std::span<const float> v, double p) {
  require_finite(v, "top_p_mask");
  require_fraction(p, "top_p_mask");
  SparsityMask mask(v.size());
  if (p == 0.0) return mask;
  if (p == 1.0) {
    // Every nonzero entry is needed to reach the full L1 norm.
    for (std::size_t i = 0; i < v.size(); ++i) mask.set(i, v[i] != 0.0f);
    return mask;
  }

  const auto order = magnitude_order(v);
  // Summing in magnitude order makes the result independent of the input permutation.
  double total = 0.0;
  for (auto i : order) total += std::fabs(static_cast<double>(v[i]));
  const double target = p * total;

  double kept = 0.0;
  for (auto i : order) {
    if (kept >= target || v[i] == 0.0f) break;
    mask.set(i, true);
    kept += std::fabs(static_cast<double>(v[i]));
  }
  return mask;
}

SparsityMask top_k_mask(std::span<const float> v, std::size_t k) {
  const std::size_t n = v.size();
  if (k > n) {
    throw InputError("top_k_mask: k=" + std::to_string(k) + " exceeds vector length " + std::to_string(n));
  }
  require_finite(v, "top_k_mask");
  if (k == 0) return SparsityMask::empty(n);
  if (k == n) return SparsityMask::full(n);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // ByMagnitude is a strict total order, so selection matches a stable full sort.
  std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1), order.end(),
                   ByMagnitude{v});
  SparsityMask mask(n);
  for (std::size_t r = 0; r < k; ++r) mask.set(order[r], true);
  return mask;
}

SparsityMask max_p_mask(std::span<const float> v, double p) {
  require_finite(v, "max_p_mask");
  require_fraction(p, "max_p_mask");
  float peak = 0.0f;
  for (float x : v) peak = std::max(peak, std::fabs(x));
  const double threshold = p * static_cast<double>(peak);
  SparsityMask mask(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask.set(i, static_cast<double>(std::fabs(v[i])) >= threshold);
  }
  return mask;
}

SparsityMask make_mask(std::span<const float> v, const SparsifyRule& rule) {
  switch (rule.kind) {
    case RuleKind::TopP: return top_p_mask(v, rule.p);
    case RuleKind::TopK: return top_k_mask(v, rule.k);
    case RuleKind::MaxP: return max_p_mask(v, rule.p);
  }
  throw InputError("unknown rule kind");
}

std::vector<float> apply_mask(std::span<const float> v, const SparsityMask& mask) {
  std::vector<float> out(v.begin(), v.end());
  apply_mask_inplace(out, mask);
  return out;
}

void apply_mask_inplace(std::span<float> v, const SparsityMask& mask) {
  if (v.size() != mask.size()) {
    throw ShapeError("apply_mask: vector length " + std::to_string(v.size()) + " vs mask length " +
                     std::to_string(mask.size()));
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!mask.kept(i)) v[i] = 0.0f;
  }
}

double induced_sparsity(const SparsityMask& mask) {
  if (mask.size() == 0) throw InputError("induced_sparsity: empty mask");
  return static_cast<double>(mask.size() - mask.kept_count()) / static_cast<double>(mask.size());
}

}  // namespace sparseglu
