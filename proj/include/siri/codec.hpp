// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "siri/bytes.hpp"
#include "siri/errors.hpp"
#include "siri/index_types.hpp"
#include "siri/node_id.hpp"

namespace siri {

// Bounds-checked front-to-back reader over a serialized node. Trailing bytes
// are permitted (ablated nodes carry a version salt after the payload).
class ByteReader {
 public:
  explicit ByteReader(BytesView data) : data_(data) {}

  std::uint8_t u8() {
    need(1);
    return data_[pos_++];
  }

  std::uint16_t u16le() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  std::uint32_t u32le() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 4;
    return v;
  }

  std::uint64_t u64le() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | data_[pos_ + static_cast<std::size_t>(i)];
    pos_ += 8;
    return v;
  }

  Bytes bytes(std::size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<std::ptrdiff_t>(pos_),
              data_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  NodeId node_id() {
    need(32);
    NodeId id;
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), 32, id.digest.begin());
    pos_ += 32;
    return id;
  }

  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw CorruptionError("node decode: truncated");
  }

  BytesView data_;
  std::size_t pos_ = 0;
};

// Entries serialize as length-prefixed key then value. The POS-Tree leaf
// chunker runs over exactly these bytes.
inline void append_entry(Bytes& out, const Entry& e) {
  append_u32le(out, static_cast<std::uint32_t>(e.key.size()));
  append_bytes(out, e.key);
  append_u32le(out, static_cast<std::uint32_t>(e.value.size()));
  append_bytes(out, e.value);
}

inline Bytes entry_bytes(const Entry& e) {
  Bytes out;
  out.reserve(8 + e.key.size() + e.value.size());
  append_entry(out, e);
  return out;
}

inline Entry read_entry(ByteReader& r) {
  Entry e;
  e.key = r.bytes(r.u32le());
  e.value = r.bytes(r.u32le());
  return e;
}

}  // namespace siri
