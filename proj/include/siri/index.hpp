// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

// Uniform persistent-index interface over the four structures. Every
// returned handle is a new immutable version; old roots stay readable.

std::optional<Bytes> index_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                  ReadStats* stats = nullptr);
RootHandle index_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                        WriteStats* stats = nullptr);
RootHandle index_remove(NodeStore& store, const RootHandle& root, BytesView key,
                        WriteStats* stats = nullptr);

// Equivalent to folding insert over the batch. Duplicate keys in one batch
// are a usage error.
RootHandle index_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                           WriteStats* stats = nullptr);

// Record-level difference. Shared subtrees are skipped by node id without
// descending. Roots must agree on structure kind and parameters.
DiffResult index_diff(const NodeStore& store, const RootHandle& a, const RootHandle& b,
                      ReadStats* stats = nullptr);

// Diff-then-apply union merge; key conflicts resolve per strategy, and Abort
// reports them instead of producing a root.
MergeOutcome index_merge(NodeStore& store, const RootHandle& a, const RootHandle& b,
                         MergeStrategy strategy, WriteStats* stats = nullptr);

Proof index_prove(const NodeStore& store, const RootHandle& root, BytesView key);
bool index_verify(const NodeId& digest, BytesView key, BytesView expected_value,
                  const Proof& proof);

// All records, ascending by key.
std::vector<Entry> index_collect_entries(const NodeStore& store, const RootHandle& root);

// Ids referenced by this node's serialization, in order (parse by kind).
std::vector<NodeId> node_children(StructureKind kind, BytesView node_bytes);

}  // namespace siri
