// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace siri {

// A reference into the store that cannot be resolved or decoded, i.e. an
// index bug or tampered data.
class CorruptionError : public std::runtime_error {
 public:
  explicit CorruptionError(const std::string& what) : std::runtime_error(what) {}
};

// The caller violated an operation's contract (duplicate batch keys,
// mismatched structure kinds, ...).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A persisted file that cannot be read back (bad magic, truncation, ...).
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace siri
