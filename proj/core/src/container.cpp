// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/container.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <unordered_set>

#include "sparseglu/error.hpp"

namespace sparseglu {
namespace {

constexpr std::uint8_t kMagic[4] = {'G', 'S', 'P', 'T'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::size_t offset() const noexcept { return pos_; }

  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw FormatError(std::string("truncated container while reading ") + what, pos_);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> save_container(std::span<const Tensor> tensors) {
  std::unordered_set<std::string> seen;
  Writer w;
  w.bytes(kMagic, 4);
  w.u32(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (!seen.insert(t.name()).second) {
      throw InputError("duplicate tensor name '" + t.name() + "'");
    }
    w.u32(static_cast<std::uint32_t>(t.name().size()));
    w.bytes(t.name().data(), t.name().size());
    w.u32(static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.dims()) w.u64(d);
    w.u32(kDtypeF32);
    for (float v : t.data()) w.u32(std::bit_cast<std::uint32_t>(v));
  }
  return w.take();
}

std::vector<Tensor> load_container(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  auto magic = r.take(4, "magic");
  if (!std::equal(magic.begin(), magic.end(), kMagic)) throw FormatError("bad magic", 0);
  const auto version_at = r.offset();
  const auto version = r.u32("version");
  if (version != kContainerVersion) {
    throw FormatError("unsupported container version " + std::to_string(version), version_at);
  }
  const auto count = r.u32("tensor count");

  std::vector<Tensor> tensors;
  std::unordered_set<std::string> seen;
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto entry_at = r.offset();
    const auto name_len = r.u32("name length");
    auto name_bytes = r.take(name_len, "name");
    std::string name(name_bytes.begin(), name_bytes.end());
    if (!seen.insert(name).second) throw FormatError("duplicate tensor name '" + name + "'", entry_at);

    const auto rank_at = r.offset();
    const auto rank = r.u32("rank");
    if (rank == 0) throw FormatError("tensor '" + name + "' has rank 0", rank_at);
    std::vector<std::uint64_t> dims(rank);
    std::uint64_t numel = 1;
    for (auto& d : dims) {
      const auto dim_at = r.offset();
      d = r.u64("dims");
      if (d == 0) throw FormatError("tensor '" + name + "' has a zero dimension", dim_at);
      if (numel > (std::uint64_t{1} << 40) / d) {
        throw FormatError("tensor '" + name + "' is implausibly large", dim_at);
      }
      numel *= d;
    }
    const auto dtype_at = r.offset();
    const auto dtype = r.u32("dtype");
    if (dtype != kDtypeF32) {
      throw FormatError("tensor '" + name + "' has unknown dtype tag " + std::to_string(dtype), dtype_at);
    }
    const auto payload_at = r.offset();
    auto payload = r.take(numel * 4, "payload");
    std::vector<float> data(numel);
    for (std::uint64_t i = 0; i < numel; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t{payload[4 * i + b]} << (8 * b);
      data[i] = std::bit_cast<float>(bits);
      if (!std::isfinite(data[i])) {
        throw FormatError("tensor '" + name + "' holds a non-finite value", payload_at + 4 * i);
      }
    }
    tensors.emplace_back(std::move(name), std::move(dims), std::move(data));
  }
  if (r.offset() != bytes.size()) throw FormatError("trailing bytes after last tensor", r.offset());
  return tensors;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void write_container_file(const std::filesystem::path& path, std::span<const Tensor> tensors) {
  write_file_bytes(path, save_container(tensors));
}

std::vector<Tensor> read_container_file(const std::filesystem::path& path) {
  return load_container(read_file_bytes(path));
}

}  // namespace sparseglu
