// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

// Byte-level and node-count-level sharing over a set of index versions.
// Pages are the serialized nodes reachable from each root; root handles
// themselves are not counted.
struct DedupReport {
  std::uint64_t union_bytes = 0;
  std::uint64_t sum_bytes = 0;
  std::uint64_t union_nodes = 0;
  std::uint64_t sum_nodes = 0;
  double dedup_ratio = 0.0;         // 1 - union_bytes / sum_bytes
  double node_sharing_ratio = 0.0;  // 1 - union_nodes / sum_nodes
};

DedupReport measure(const NodeStore& store, std::span<const RootHandle> roots);

// Inputs of the closed-form two-version predictions. Key lengths are in trie
// steps (nibbles) for the MPT form; the bound cancels them out when
// max_key_len == mean_key_len.
struct TheoryParams {
  std::uint64_t n_records = 0;
  double alpha = 0.0;
  double max_key_len = 0.0;   // L
  double mean_key_len = 0.0;  // L-bar
  double record_bytes = 0.0;  // r
  double hash_bytes = 32.0;   // c
};

// Predicted dedup ratio between two consecutive versions differing in an
// alpha fraction of a contiguous key range. MBT and POS share the
// 1/2 - alpha/2 form; MPT scales it by the key-length mix. No closed form
// exists for the baseline; it returns the generic bound.
double predict_dedup(StructureKind kind, const TheoryParams& p);

enum class VersionScenario { Update, Insert };

struct ContinuousDifferentialResult {
  std::vector<RootHandle> roots;  // version 0 first
  DedupReport report;
};

// Builds version 0 from the dataset, then derives each next version by
// editing a contiguous key range of size alpha*N (updates keep the record
// count; inserts grow it by the same amount), and measures sharing over the
// whole version set.
ContinuousDifferentialResult continuous_differential(NodeStore& store, const RootHandle& base,
                                                     std::span<const Entry> dataset, double alpha,
                                                     std::size_t n_versions,
                                                     VersionScenario scenario, std::uint64_t seed);

}  // namespace siri
