// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sparseglu/tensor.hpp"

namespace sparseglu {

// GSPT container, little-endian throughout:
//   "GSPT" | u32 version (=1) | u32 tensor count
//   per tensor: u32 name length | UTF-8 name | u32 rank | rank x u64 dims | u32 dtype | payload
// dtype 0 is f32, the only tag accepted by version 1.

inline constexpr std::uint32_t kContainerVersion = 1;
inline constexpr std::uint32_t kDtypeF32 = 0;

std::vector<std::uint8_t> save_container(std::span<const Tensor> tensors);

/// Decodes a container. Throws FormatError (with byte offset) on bad magic, unknown
/// version or dtype, truncation, duplicate names, or non-finite payload values.
std::vector<Tensor> load_container(std::span<const std::uint8_t> bytes);

void write_container_file(const std::filesystem::path& path, std::span<const Tensor> tensors);
std::vector<Tensor> read_container_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace sparseglu
