// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

// Baseline immutable B+-tree: child pointers are content hashes, all updates
// are copy-on-write. Unlike the other structures its layout depends on the
// insertion order, which is exactly why it serves as the non-SIRI contrast.

struct MvmbLeaf {
  std::vector<Entry> entries;  // strictly ascending
};

struct MvmbInternal {
  std::vector<Bytes> separators;  // separators.size() == children.size() - 1
  std::vector<NodeId> children;
};

using MvmbNode = std::variant<MvmbLeaf, MvmbInternal>;

Bytes mvmb_encode(const MvmbNode& node);
MvmbNode mvmb_decode(BytesView bytes);

std::optional<Bytes> mvmb_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                 ReadStats* stats = nullptr);
RootHandle mvmb_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                       WriteStats* stats = nullptr);
RootHandle mvmb_remove(NodeStore& store, const RootHandle& root, BytesView key,
                       WriteStats* stats = nullptr);
RootHandle mvmb_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                          WriteStats* stats = nullptr);

Proof mvmb_prove(const NodeStore& store, const RootHandle& root, BytesView key);
bool mvmb_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof);

std::size_t mvmb_height(const NodeStore& store, const RootHandle& root);

// Occupancy, separator ordering and uniform leaf depth; throws
// CorruptionError on violations.
void mvmb_check_invariants(const NodeStore& store, const RootHandle& root);

}  // namespace siri
