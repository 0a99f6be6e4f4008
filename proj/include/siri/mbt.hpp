// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

struct MbtInternal {
  std::vector<NodeId> children;
};

struct MbtBucket {
  std::vector<Entry> entries;  // strictly ascending by key
};

using MbtNode = std::variant<MbtInternal, MbtBucket>;

Bytes mbt_encode(const MbtNode& node);
MbtNode mbt_decode(BytesView bytes);

// Key placement: first 8 bytes of SHA-256(key), big-endian, mod B.
std::uint64_t mbt_bucket_of(BytesView key, const MbtParams& params);

// Number of internal levels above the bucket layer (ceil(log_m B)).
std::uint32_t mbt_levels(const MbtParams& params);

// Child-slot steps from the root to the given bucket, most significant
// base-m digit first; one step per internal level.
std::vector<std::uint32_t> mbt_path_to(std::uint64_t bucket_index, const MbtParams& params);

// (internal_nodes, total_nodes) of one version; internal = (B-1)/(m-1) when
// B is a power of m.
std::pair<std::uint64_t, std::uint64_t> mbt_node_counts(const MbtParams& params);

// Root over B materialized empty buckets; the tree shape never changes after
// this.
RootHandle mbt_empty(NodeStore& store, const MbtParams& params);

std::optional<Bytes> mbt_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats = nullptr);
RootHandle mbt_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats = nullptr);
RootHandle mbt_remove(NodeStore& store, const RootHandle& root, BytesView key,
                      WriteStats* stats = nullptr);
RootHandle mbt_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                         WriteStats* stats = nullptr);

Proof mbt_prove(const NodeStore& store, const RootHandle& root, BytesView key);
bool mbt_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof);

}  // namespace siri
