// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

struct PosItem {
  Bytes split_key;  // largest key in the child's subtree
  NodeId child;
};

struct PosLeaf {
  std::vector<Entry> entries;  // strictly ascending by key
};

struct PosInternal {
  std::vector<PosItem> items;
};

using PosNode = std::variant<PosLeaf, PosInternal>;

Bytes pos_encode(const PosNode& node);
PosNode pos_decode(BytesView bytes);

// Bottom-up build: the serialized entry stream is cut into leaves wherever
// the rolling fingerprint matches (cuts snap to entry ends; the window and
// the min/max gates restart at each cut, so a node's extent is a function of
// its own content only). Upper layers cut the (split_key, child id) stream
// wherever hash_matches fires on the id; a cut needs at least two pending
// items so every layer strictly shrinks. Entries must be sorted and unique.
RootHandle pos_build(NodeStore& store, const PosParams& params, std::span<const Entry> entries,
                     WriteStats* stats = nullptr);

std::optional<Bytes> pos_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats = nullptr);

// Incremental update: splices the entry into its leaf, re-runs boundary
// detection from that leaf's start and continues until a cut coincides with
// a pre-existing node boundary (all later siblings are then reused by id),
// then repeats the process one layer up. The resulting digest equals
// pos_build of the updated record set. Under params.local_edits_only the
// detection never continues past the edited node, which makes the layout
// depend on edit history (the structural-invariance ablation).
RootHandle pos_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats = nullptr);
RootHandle pos_remove(NodeStore& store, const RootHandle& root, BytesView key,
                      WriteStats* stats = nullptr);
RootHandle pos_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                         WriteStats* stats = nullptr);

Proof pos_prove(const NodeStore& store, const RootHandle& root, BytesView key);
bool pos_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof);

// Root-to-leaf level count; 0 for an empty tree.
std::size_t pos_height(const NodeStore& store, const RootHandle& root);

// In-order entries; keys come out globally sorted and unique.
std::vector<Entry> pos_collect_entries(const NodeStore& store, const RootHandle& root);

}  // namespace siri
