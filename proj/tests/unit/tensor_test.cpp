// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "sparseglu/error.hpp"
#include "sparseglu/random.hpp"
#include "sparseglu/tensor.hpp"

namespace sparseglu {
namespace {

TEST(Tensor, RejectsInconsistentShapes) {
  EXPECT_THROW(Tensor("t", {}), ShapeError);
  EXPECT_THROW(Tensor("t", {2, 0}), ShapeError);
  EXPECT_THROW(Tensor("t", {2, 2}, std::vector<float>(3)), ShapeError);
  const Tensor ok("t", {2, 3});
  EXPECT_EQ(ok.numel(), 6u);
  EXPECT_EQ(ok.rows(), 2u);
  EXPECT_EQ(ok.cols(), 3u);
  EXPECT_THROW(Tensor("v", {4}).rows(), ShapeError);
}

TEST(Tensor, FinitenessAndBitEquality) {
  Tensor a("a", {2}, {1.0f, -0.0f});
  Tensor b("a", {2}, {1.0f, 0.0f});
  EXPECT_TRUE(a.all_finite());
  EXPECT_FALSE(a.bit_equal(b));  // -0 and +0 differ bitwise
  b.data()[1] = -0.0f;
  EXPECT_TRUE(a.bit_equal(b));
  a.data()[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_FALSE(a.all_finite());
}

TEST(Gemv, IdentityZeroAndHandArithmetic) {
  const std::vector<float> eye{1, 0, 0, 1};
  EXPECT_EQ(gemv(MatrixView(eye, 2, 2), std::vector<float>{3, -1}), (std::vector<float>{3, -1}));

  SplitMix64 rng(5);
  const auto w = testing::normal_vector(rng, 9);
  EXPECT_EQ(gemv(MatrixView(w, 3, 3), std::vector<float>{0, 0, 0}), (std::vector<float>{0, 0, 0}));

  const std::vector<float> m{1, 2, 3, 4};
  EXPECT_EQ(gemv(MatrixView(m, 2, 2), std::vector<float>{1, 1}), (std::vector<float>{3, 7}));
}

TEST(Gemv, ShapeMismatchThrows) {
  const std::vector<float> m(6);
  EXPECT_THROW(gemv(MatrixView(m, 2, 3), std::vector<float>{1, 1}), ShapeError);
  EXPECT_THROW(MatrixView(m, 4, 2), ShapeError);
}

TEST(Gemv, CountsMacsAndMatchesDoubleOracle) {
  SplitMix64 rng(11);
  const auto w = testing::normal_vector(rng, 64 * 48);
  const auto x = testing::normal_vector(rng, 48);
  KernelCounters c;
  const auto y = gemv(MatrixView(w, 64, 48), x, &c);
  EXPECT_EQ(c.macs, 64u * 48u);
  EXPECT_EQ(c.weight_loads, 64u * 48u);
  const std::vector<double> xd(x.begin(), x.end());
  const auto ref = testing::gemv_f64(MatrixView(w, 64, 48), xd);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-4);
}

TEST(Gemm, MatchesRowwiseGemv) {
  SplitMix64 rng(3);
  const auto a = testing::normal_vector(rng, 5 * 7);
  const auto b = testing::normal_vector(rng, 7 * 4);
  const auto c = gemm(MatrixView(a, 5, 7), MatrixView(b, 7, 4));
  ASSERT_EQ(c.size(), 20u);
  for (std::size_t i = 0; i < 5; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 7; ++k) ref += static_cast<double>(a[i * 7 + k]) * b[k * 4 + j];
      EXPECT_NEAR(c[i * 4 + j], ref, 1e-5);
    }
  }
}

TEST(SplitMix64, MatchesPublishedSequence) {
  // First outputs of the reference SplitMix64 generator seeded with 0.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next(), 0x06C45D188009454FULL);
}

TEST(SplitMix64, NormalConsumesTwoDrawsAndLooksStandard) {
  SplitMix64 a(9), b(9);
  (void)a.next_normal();
  (void)b.next();
  (void)b.next();
  EXPECT_EQ(a.next(), b.next());

  SplitMix64 rng(1);
  double sum = 0.0, sq = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(SeededTensor, DeterministicSeedSensitiveAndZeroScale) {
  const auto a = seeded_tensor(42, {16, 8}, 0.5f, "w");
  const auto b = seeded_tensor(42, {16, 8}, 0.5f, "w");
  const auto c = seeded_tensor(43, {16, 8}, 0.5f, "w");
  EXPECT_TRUE(a.bit_equal(b));
  EXPECT_FALSE(a.bit_equal(c));
  const auto z = seeded_tensor(42, {4, 4}, 0.0f);
  for (float v : z.data()) EXPECT_EQ(std::bit_cast<std::uint32_t>(v), 0u);
  EXPECT_THROW(seeded_tensor(1, {}, 1.0f), ShapeError);
}

TEST(SeededTensor, DerivedStreamsDiffer) {
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

}  // namespace
}  // namespace sparseglu
