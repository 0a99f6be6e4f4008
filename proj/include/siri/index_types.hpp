// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "siri/bytes.hpp"
#include "siri/chunker.hpp"
#include "siri/node_id.hpp"

namespace siri {

struct Entry {
  Bytes key;
  Bytes value;

  friend bool operator==(const Entry&, const Entry&) = default;
};

inline bool entry_key_less(const Entry& a, const Entry& b) {
  return bytes_less(a.key, b.key);
}

enum class StructureKind : std::uint8_t { Mpt = 0, Mbt = 1, Pos = 2, Mvmb = 3 };

const char* structure_name(StructureKind kind);
std::optional<StructureKind> structure_from_name(const std::string& name);

struct MptParams {
  friend bool operator==(const MptParams&, const MptParams&) = default;
};

struct MbtParams {
  std::uint64_t buckets = 1024;  // capacity B
  std::uint32_t fanout = 4;      // m

  friend bool operator==(const MbtParams&, const MbtParams&) = default;
};

// Chunking parameters for both POS-Tree layers. Leaf nodes cut the
// serialized entry stream with the rolling fingerprint; internal layers cut
// the child-id stream wherever hash_matches fires.
struct PosParams {
  ChunkConfig leaf;
  std::uint32_t node_pattern_bits = 5;
  std::uint64_t node_pattern_value = 0;
  std::size_t node_max_children = 256;
  bool node_force_split_at_half = false;
  // Ablation: updates rewrite only the directly affected node instead of
  // re-running boundary detection to resynchronization, so layout inherits
  // edit history.
  bool local_edits_only = false;

  // Parameters tuned for an expected serialized node size near target_bytes.
  static PosParams for_node_bytes(std::size_t target_bytes, std::size_t window_bytes = 67);

  // Forced-split-dominated variant of cfg used to knock out structural
  // invariance.
  static PosParams ablate_structural_invariance(const PosParams& cfg);

  friend bool operator==(const PosParams&, const PosParams&) = default;
};

inline bool operator==(const ChunkConfig& a, const ChunkConfig& b) {
  return a.window_bytes == b.window_bytes && a.pattern_bits == b.pattern_bits &&
         a.pattern_value == b.pattern_value && a.max_chunk_bytes == b.max_chunk_bytes &&
         a.min_chunk_bytes == b.min_chunk_bytes && a.force_split_at_half == b.force_split_at_half;
}

struct MvmbParams {
  std::uint32_t order = 5;  // max children of an internal node; leaves hold order-1 entries

  friend bool operator==(const MvmbParams&, const MvmbParams&) = default;
};

using IndexMeta = std::variant<MptParams, MbtParams, PosParams, MvmbParams>;

// One immutable version of one index: structure tag plus the root node id.
// meta carries the structure parameters frozen for the lineage; an absent
// root is the empty index.
struct RootHandle {
  StructureKind kind = StructureKind::Mpt;
  std::optional<NodeId> root;
  IndexMeta meta = MptParams{};

  bool empty() const { return !root.has_value(); }

  friend bool operator==(const RootHandle&, const RootHandle&) = default;
};

RootHandle empty_root(StructureKind kind);
RootHandle empty_root(StructureKind kind, IndexMeta meta);

struct DiffResult {
  std::vector<Entry> only_in_a;
  std::vector<Entry> only_in_b;
  // key, value in a, value in b
  std::vector<std::tuple<Bytes, Bytes, Bytes>> modified;

  bool empty() const { return only_in_a.empty() && only_in_b.empty() && modified.empty(); }
};

enum class MergeStrategy : std::uint8_t { Abort = 0, TakeA = 1, TakeB = 2 };

struct MergeOutcome {
  std::optional<RootHandle> merged_root;
  std::vector<std::tuple<Bytes, Bytes, Bytes>> conflicts;  // key, value_a, value_b

  bool ok() const { return merged_root.has_value(); }
};

// Nodes on the path from the root to the entry's node, as stored bytes.
struct Proof {
  StructureKind kind = StructureKind::Mpt;
  IndexMeta meta = MptParams{};
  std::vector<Bytes> path_nodes;
};

struct ReadStats {
  std::uint64_t nodes_visited = 0;
};

struct WriteStats {
  std::uint64_t nodes_visited = 0;
  std::uint64_t nodes_created = 0;
  // Subset of nodes_created that are leaf-level nodes (buckets for MBT);
  // the POS-Tree resynchronization span is measured with this.
  std::uint64_t leaf_nodes_created = 0;
};

}  // namespace siri
