// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <limits>
#include <ostream>

#include "oracles.hpp"
#include "sparseglu/container.hpp"
#include "sparseglu/error.hpp"
#include "sparseglu/random.hpp"

namespace sparseglu {
namespace {

std::vector<std::uint8_t> one_tensor_bytes() {
  const Tensor t("w", {2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  return save_container(std::span<const Tensor>(&t, 1));
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

// Layout of one_tensor_bytes(): header 12, name length 4, name 1, rank 4, dims 16, dtype 4.
constexpr std::size_t kRankAt = 12 + 4 + 1;
constexpr std::size_t kDimsAt = kRankAt + 4;
constexpr std::size_t kDtypeAt = kDimsAt + 16;
constexpr std::size_t kPayloadAt = kDtypeAt + 4;

TEST(Container, EmptyContainerIsTwelveByteHeader) {
  const auto bytes = save_container({});
  ASSERT_EQ(bytes.size(), 12u);
  EXPECT_EQ(std::memcmp(bytes.data(), "GSPT", 4), 0);
  EXPECT_EQ(bytes[4], 1u);  // version, little-endian
  EXPECT_TRUE(load_container(bytes).empty());
}

TEST(Container, ZeroTensorRoundTripsBitExact) {
  const Tensor z("zeros", {2, 2});
  const auto back = load_container(save_container(std::span<const Tensor>(&z, 1)));
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].bit_equal(z));
}

TEST(Container, HundredSeededTensorsAreByteStable) {
  std::vector<Tensor> ts;
  for (std::uint64_t i = 0; i < 100; ++i) {
    const std::uint64_t rows = 1 + i % 7, cols = 1 + (i * 3) % 11;
    ts.push_back(seeded_tensor(derive_seed(42, i), {rows, cols}, 1.0f, "t" + std::to_string(i)));
  }
  const auto first = save_container(ts);
  const auto loaded = load_container(first);
  ASSERT_EQ(loaded.size(), ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_TRUE(loaded[i].bit_equal(ts[i]));
  EXPECT_EQ(save_container(loaded), first);
}

TEST(Container, LayoutMatchesDocumentedOffsets) {
  const auto b = one_tensor_bytes();
  ASSERT_EQ(b.size(), kPayloadAt + 16);
  EXPECT_EQ(b[12], 1u);  // name length
  EXPECT_EQ(b[16], 'w');
  EXPECT_EQ(b[kRankAt], 2u);
  EXPECT_EQ(b[kDimsAt], 2u);
  EXPECT_EQ(b[kDtypeAt], 0u);
  float first;
  std::memcpy(&first, b.data() + kPayloadAt, 4);
  EXPECT_EQ(first, 1.0f);
}

TEST(Container, SaveRejectsDuplicateNames) {
  const std::vector<Tensor> ts{Tensor("a", {1}), Tensor("a", {2})};
  EXPECT_THROW(save_container(ts), InputError);
}

struct Corruption {
  const char* label;
  std::size_t expected_offset;
  void (*mutate)(std::vector<std::uint8_t>&);
};

void PrintTo(const Corruption& c, std::ostream* os) { *os << c.label; }

class ContainerCorruption : public ::testing::TestWithParam<Corruption> {};

TEST_P(ContainerCorruption, ReportsFormatErrorAtOffset) {
  auto bytes = one_tensor_bytes();
  GetParam().mutate(bytes);
  try {
    load_container(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), GetParam().expected_offset) << e.what();
  }
}

INSTANTIATE_TEST_SUITE_P(
    Cases, ContainerCorruption,
    ::testing::Values(
        Corruption{"bad_magic", 0, [](auto& b) { b[0] = 'X'; }},
        Corruption{"bad_version", 4, [](auto& b) { put_u32(b, 4, 2); }},
        Corruption{"unknown_dtype", kDtypeAt, [](auto& b) { put_u32(b, kDtypeAt, 1); }},
        Corruption{"rank_zero", kRankAt, [](auto& b) { put_u32(b, kRankAt, 0); }},
        Corruption{"zero_dim", kDimsAt, [](auto& b) { std::memset(b.data() + kDimsAt, 0, 8); }},
        Corruption{"truncated_payload", kPayloadAt, [](auto& b) { b.resize(b.size() - 3); }},
        Corruption{"trailing_bytes", kPayloadAt + 16, [](auto& b) { b.push_back(0); }},
        Corruption{"nan_payload", kPayloadAt + 8,
                   [](auto& b) {
                     const float nan = std::numeric_limits<float>::quiet_NaN();
                     std::memcpy(b.data() + kPayloadAt + 8, &nan, 4);
                   }},
        Corruption{"count_overstated", 12 + 4 + 1 + 4 + 16 + 4 + 16, [](auto& b) { put_u32(b, 8, 2); }}),
    [](const auto& info) { return std::string(info.param.label); });

TEST(Container, DuplicateNameOnLoadIsFormatError) {
  const std::vector<Tensor> ts{Tensor("a", {1}), Tensor("b", {1})};
  auto bytes = save_container(ts);
  // Second entry starts after 12 + 4 + 1 + 4 + 8 + 4 + 4 bytes; rename "b" to "a".
  const std::size_t second = 12 + 4 + 1 + 4 + 8 + 4 + 4;
  bytes[second + 4] = 'a';
  try {
    load_container(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), second);
  }
}

TEST(Container, FileRoundTripAndMissingFile) {
  testing::TempDir dir("container");
  const std::vector<Tensor> ts{seeded_tensor(1, {3, 5}, 1.0f, "x")};
  write_container_file(dir / "m.gspt", ts);
  const auto back = read_container_file(dir / "m.gspt");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].bit_equal(ts[0]));
  EXPECT_THROW(read_container_file(dir / "absent.gspt"), IoError);
}

}  // namespace
}  // namespace sparseglu
