// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <functional>
#include <string>

#include "siri/bytes.hpp"

namespace siri {

// Content address of a stored node: SHA-256 of its canonical serialization.
struct NodeId {
  std::array<std::uint8_t, 32> digest{};

  friend bool operator==(const NodeId& a, const NodeId& b) { return a.digest == b.digest; }
  friend bool operator!=(const NodeId& a, const NodeId& b) { return !(a == b); }
  friend bool operator<(const NodeId& a, const NodeId& b) { return a.digest < b.digest; }

  std::string hex() const { return to_hex(BytesView(digest.data(), digest.size())); }
};

NodeId sha256(BytesView data);

struct NodeIdHash {
  std::size_t operator()(const NodeId& id) const {
    std::size_t h;
    std::memcpy(&h, id.digest.data(), sizeof(h));
    return h;
  }
};

inline void append_node_id(Bytes& out, const NodeId& id) {
  out.insert(out.end(), id.digest.begin(), id.digest.end());
}

}  // namespace siri
