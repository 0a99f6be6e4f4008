// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

using Nibbles = std::vector<std::uint8_t>;

// Big-endian nibble split: high nibble of each byte first.
Nibbles key_to_nibbles(BytesView key);
Bytes nibbles_to_key(const Nibbles& nibbles);

// Hex-prefix encoding: header nibble 2*is_leaf + parity, pad nibble 0 when
// the path length is even, then the path nibbles packed two per byte.
Bytes hp_encode(const Nibbles& nibbles, bool is_leaf);
std::pair<Nibbles, bool> hp_decode(BytesView encoded);  // -> (nibbles, is_leaf)

struct MptBranch {
  std::array<std::optional<NodeId>, 16> children{};
  std::optional<Bytes> value;
};

struct MptLeaf {
  Nibbles path;
  Bytes value;
};

struct MptExtension {
  Nibbles path;  // non-empty; child is always a branch
  NodeId child;
};

using MptNode = std::variant<MptBranch, MptLeaf, MptExtension>;

Bytes mpt_encode(const MptNode& node);
MptNode mpt_decode(BytesView bytes);

std::optional<Bytes> mpt_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats = nullptr);
RootHandle mpt_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats = nullptr);
RootHandle mpt_remove(NodeStore& store, const RootHandle& root, BytesView key,
                      WriteStats* stats = nullptr);

Proof mpt_prove(const NodeStore& store, const RootHandle& root, BytesView key);
bool mpt_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof);

// Walks every node and checks canonical form: extensions have non-empty
// paths and branch children, branches have >= 2 occupied slots or an
// occupied slot plus a value. Throws CorruptionError on violations.
void mpt_check_canonical(const NodeStore& store, const RootHandle& root);

}  // namespace siri
