// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace sparseglu {

/// Keep/drop flag per activation entry.
class SparsityMask {
 public:
  SparsityMask() = default;
  explicit SparsityMask(std::size_t n, bool keep_all = false) : keep_(n, keep_all ? 1 : 0) {}

  static SparsityMask full(std::size_t n) { return SparsityMask(n, true); }
  static SparsityMask empty(std::size_t n) { return SparsityMask(n, false); }
  static SparsityMask from_indices(std::size_t n, std::span<const std::size_t> kept);

  std::size_t size() const noexcept { return keep_.size(); }
  bool kept(std::size_t i) const noexcept { return keep_[i] != 0; }
  void set(std::size_t i, bool keep) noexcept { keep_[i] = keep ? 1 : 0; }

  std::size_t kept_count() const noexcept;
  /// Kept positions in ascending order.
  std::vector<std::size_t> kept_indices() const;
  /// True when every kept entry of *this is also kept in `other`.
  bool subset_of(const SparsityMask& other) const noexcept;

  std::span<const std::uint8_t> bits() const noexcept { return keep_; }

  friend bool operator==(const SparsityMask&, const SparsityMask&) = default;

 private:
  std::vector<std::uint8_t> keep_;
};

enum class RuleKind { TopP, TopK, MaxP };

std::string_view to_string(RuleKind kind) noexcept;
/// Accepts "topp"/"top-p"/"top_p" style spellings. Throws ConfigError.
RuleKind parse_rule_kind(std::string_view text);

struct SparsifyRule {
  RuleKind kind = RuleKind::TopP;
  double p = 1.0;     // TopP, MaxP
  std::size_t k = 0;  // TopK

  static SparsifyRule top_p(double p) { return {RuleKind::TopP, p, 0}; }
  static SparsifyRule top_k(std::size_t k) { return {RuleKind::TopK, 0.0, k}; }
  static SparsifyRule max_p(double p) { return {RuleKind::MaxP, p, 0}; }

  /// Throws InputError when p is outside [0, 1].
  void validate() const;
  /// The threshold as a number (p, or k for TopK).
  double threshold() const noexcept { return kind == RuleKind::TopK ? static_cast<double>(k) : p; }
};

/// Smallest magnitude-greedy prefix whose kept L1 mass reaches p * ||v||_1.
/// Equal magnitudes resolve to the lower index. Zero entries are never kept.
SparsityMask top_p_mask(std::span<const float> v, double p);

/// Exactly k largest-magnitude entries, lower index first on ties. Throws InputError if k > n.
SparsityMask top_k_mask(std::span<const float> v, std::size_t k);

/// {i : |v_i| >= p * max|v|}.
SparsityMask max_p_mask(std::span<const float> v, double p);

SparsityMask make_mask(std::span<const float> v, const SparsifyRule& rule);

/// Elementwise v * mask. Dropped entries become +0.0; kept entries are copied bit-for-bit.
std::vector<float> apply_mask(std::span<const float> v, const SparsityMask& mask);
void apply_mask_inplace(std::span<float> v, const SparsityMask& mask);

/// Fraction of dropped entries. Throws InputError on an empty mask.
double induced_sparsity(const SparsityMask& mask);

}  // namespace sparseglu
