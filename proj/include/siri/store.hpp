// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <unordered_map>

#include "siri/bytes.hpp"
#include "siri/node_id.hpp"

namespace siri {

struct StoreStats {
  std::uint64_t node_count = 0;
  std::uint64_t total_bytes = 0;

  friend bool operator==(const StoreStats&, const StoreStats&) = default;
};

// Content-addressed, append-only node store shared by all index structures.
// Identical byte sequences collapse to a single stored node, which is what
// gives copy-on-write trees their structural deduplication.
//
// Concurrency: any number of readers may run concurrently with one writer;
// concurrent puts of identical bytes are race-free and idempotent.
class NodeStore {
 public:
  NodeStore() = default;
  NodeStore(const NodeStore&) = delete;
  NodeStore& operator=(const NodeStore&) = delete;
  NodeStore(NodeStore&&) = default;
  NodeStore& operator=(NodeStore&&) = default;

  // Stores node_bytes under its SHA-256 and returns that id. No-op if the
  // node already exists. If newly_added is non-null it is set to whether
  // this call added a node.
  NodeId put(BytesView node_bytes, bool* newly_added = nullptr);

  // Pointer to the stored bytes, or nullptr for an unknown id. The pointee
  // is immutable and lives as long as the store.
  const Bytes* find(const NodeId& id) const;

  std::optional<Bytes> get(const NodeId& id) const;

  bool contains(const NodeId& id) const { return find(id) != nullptr; }

  StoreStats stats() const;

  // Snapshot file: magic "SIRI", version 0x01, then repeated
  // (u32 little-endian length, payload) records. Ids are recomputed on load.
  void save(const std::filesystem::path& path) const;
  static NodeStore load(const std::filesystem::path& path);

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<NodeId, Bytes, NodeIdHash> nodes_;
  std::uint64_t total_bytes_ = 0;
};

}  // namespace siri
