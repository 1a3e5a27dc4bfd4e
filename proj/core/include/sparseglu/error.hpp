// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sparseglu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A value lies outside an operation's domain (NaN input, k > n, p outside [0,1], ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: manifest fields, CLI flags, run settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed on-disk data. `offset` is the byte position where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// A weight set does not match the tensor schema its manifest implies.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// I/O failure on a named path.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparseglu
