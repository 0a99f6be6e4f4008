// SPDX-License-Identifier: Apache-2.0
#include "siri/mbt.hpp"

#include <algorithm>
#include <map>

#include "siri/codec.hpp"
#include "siri/errors.hpp"

namespace siri {

namespace {

constexpr std::uint8_t kTagInternal = 0;
constexpr std::uint8_t kTagBucket = 1;

const MbtParams& params_of(const RootHandle& root) {
  if (root.kind != StructureKind::Mbt || !std::holds_alternative<MbtParams>(root.meta)) {
    throw UsageError("mbt: root handle is not an MBT root");
  }
  return std::get<MbtParams>(root.meta);
}

const Bytes& fetch(const NodeStore& store, const NodeId& id, std::uint64_t* visited) {
  const Bytes* b = store.find(id);
  if (!b) throw CorruptionError("mbt: dangling node id " + id.hex());
  if (visited) ++*visited;
  return *b;
}

// Nodes per level, bottom (buckets) first, ending with the single root.
std::vector<std::uint64_t> level_counts(const MbtParams& p) {
  std::vector<std::uint64_t> counts{p.buckets};
  while (counts.back() > 1) {
    counts.push_back((counts.back() + p.fanout - 1) / p.fanout);
  }
  return counts;
}

std::vector<Entry>::const_iterator find_in_bucket(const std::vector<Entry>& entries,
                                                  BytesView key) {
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
  if (it != entries.end() && bytes_equal(it->key, key)) return it;
  return entries.end();
}

}  // namespace

Bytes mbt_encode(const MbtNode& node) {
  Bytes out;
  if (const auto* in = std::get_if<MbtInternal>(&node)) {
    append_u8(out, kTagInternal);
    append_u32le(out, static_cast<std::uint32_t>(in->children.size()));
    for (const NodeId& id : in->children) append_node_id(out, id);
  } else {
    const auto& b = std::get<MbtBucket>(node);
    append_u8(out, kTagBucket);
    append_u32le(out, static_cast<std::uint32_t>(b.entries.size()));
    for (const Entry& e : b.entries) append_entry(out, e);
  }
  return out;
}

MbtNode mbt_decode(BytesView bytes) {
  ByteReader r(bytes);
  const std::uint8_t tag = r.u8();
  if (tag == kTagInternal) {
    MbtInternal in;
    const std::uint32_t count = r.u32le();
    in.children.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) in.children.push_back(r.node_id());
    return in;
  }
  if (tag == kTagBucket) {
    MbtBucket b;
    const std::uint32_t count = r.u32le();
    b.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) b.entries.push_back(read_entry(r));
    return b;
  }
  throw CorruptionError("mbt: unknown node tag");
}

std::uint64_t mbt_bucket_of(BytesView key, const MbtParams& params) {
  if (params.buckets == 0) throw UsageError("mbt: capacity must be positive");
  const NodeId h = sha256(key);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | h.digest[static_cast<std::size_t>(i)];
  return v % params.buckets;
}

std::uint32_t mbt_levels(const MbtParams& params) {
  return static_cast<std::uint32_t>(level_counts(params).size() - 1);
}

std::vector<std::uint32_t> mbt_path_to(std::uint64_t bucket_index, const MbtParams& params) {
  const std::uint32_t levels = mbt_levels(params);
  std::vector<std::uint32_t> steps(levels);
  std::uint64_t pow = 1;
  for (std::uint32_t k = 0; k + 1 < levels; ++k) pow *= params.fanout;
  for (std::uint32_t k = 0; k < levels; ++k) {
    steps[k] = static_cast<std::uint32_t>((bucket_index / pow) % params.fanout);
    pow /= params.fanout;
  }
  return steps;
}

std::pair<std::uint64_t, std::uint64_t> mbt_node_counts(const MbtParams& params) {
  const auto counts = level_counts(params);
  std::uint64_t internal = 0;
  for (std::size_t k = 1; k < counts.size(); ++k) internal += counts[k];
  return {internal, internal + params.buckets};
}

RootHandle mbt_empty(NodeStore& store, const MbtParams& params) {
  if (params.fanout < 2) throw UsageError("mbt: fanout must be >= 2");
  const auto counts = level_counts(params);
  const NodeId empty_bucket = store.put(mbt_encode(MbtBucket{}));
  NodeId full = empty_bucket;
  NodeId tail = empty_bucket;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    const std::uint64_t below = counts[k - 1];
    const std::uint64_t here = counts[k];
    const std::uint64_t tail_children = below - (here - 1) * params.fanout;
    MbtInternal tail_node;
    for (std::uint64_t i = 0; i + 1 < tail_children; ++i) tail_node.children.push_back(full);
    tail_node.children.push_back(tail);
    tail = store.put(mbt_encode(tail_node));
    if (here > 1) {
      MbtInternal full_node;
      full_node.children.assign(params.fanout, full);
      full = store.put(mbt_encode(full_node));
    }
  }
  RootHandle root;
  root.kind = StructureKind::Mbt;
  root.meta = params;
  root.root = tail;
  return root;
}

std::optional<Bytes> mbt_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats) {
  const MbtParams& p = params_of(root);
  if (root.empty()) return std::nullopt;  // never materialized
  std::uint64_t visited = 0;
  const std::uint64_t bucket = mbt_bucket_of(key, p);
  NodeId cur = *root.root;
  for (std::uint32_t step : mbt_path_to(bucket, p)) {
    const MbtNode node = mbt_decode(fetch(store, cur, &visited));
    const auto* in = std::get_if<MbtInternal>(&node);
    if (!in || step >= in->children.size()) throw CorruptionError("mbt: malformed internal path");
    cur = in->children[step];
  }
  const MbtNode node = mbt_decode(fetch(store, cur, &visited));
  const auto* b = std::get_if<MbtBucket>(&node);
  if (!b) throw CorruptionError("mbt: expected bucket at leaf level");
  if (stats) stats->nodes_visited += visited;
  auto it = find_in_bucket(b->entries, key);
  if (it == b->entries.end()) return std::nullopt;
  return it->value;
}

namespace {

struct BucketChange {
  std::vector<Entry> upserts;
  std::vector<Bytes> removes;
};

// Applies upserts/removes bucket by bucket, then rebuilds only the affected
// internal paths bottom-up. Returns the original handle when nothing
// actually changed.
RootHandle apply_changes(NodeStore& store, const RootHandle& base,
                         std::map<std::uint64_t, BucketChange>& by_bucket, WriteStats* stats) {
  const MbtParams& p = params_of(base);
  RootHandle root = base;
  if (root.empty()) {
    RootHandle fresh = mbt_empty(store, p);
    root.root = fresh.root;
  }
  const auto counts = level_counts(p);
  const std::uint32_t levels = static_cast<std::uint32_t>(counts.size() - 1);
  std::uint64_t* visited = stats ? &stats->nodes_visited : nullptr;

  // Old node ids by (level, index), filled lazily by descending from the root.
  std::map<std::pair<std::uint32_t, std::uint64_t>, NodeId> old_ids;
  old_ids[{levels, 0}] = *root.root;
  auto old_node = [&](std::uint32_t level, std::uint64_t index, auto&& self) -> NodeId {
    auto it = old_ids.find({level, index});
    if (it != old_ids.end()) return it->second;
    const NodeId parent = self(level + 1, index / p.fanout, self);
    const MbtNode node = mbt_decode(fetch(store, parent, visited));
    const auto* in = std::get_if<MbtInternal>(&node);
    const std::uint64_t slot = index % p.fanout;
    if (!in || slot >= in->children.size()) throw CorruptionError("mbt: malformed internal node");
    // Cache all siblings; they are needed when the parent is rebuilt.
    for (std::uint64_t s = 0; s < in->children.size(); ++s) {
      old_ids[{level, index - slot + s}] = in->children[s];
    }
    return in->children[slot];
  };

  auto put_node = [&](const MbtNode& node) {
    bool added = false;
    const NodeId id = store.put(mbt_encode(node), &added);
    if (stats && added) ++stats->nodes_created;
    return id;
  };

  std::map<std::uint64_t, NodeId> changed;
  for (auto& [bucket_index, change] : by_bucket) {
    const NodeId old_id = old_node(0, bucket_index, old_node);
    const MbtNode node = mbt_decode(fetch(store, old_id, visited));
    const auto* b = std::get_if<MbtBucket>(&node);
    if (!b) throw CorruptionError("mbt: expected bucket at leaf level");
    std::vector<Entry> entries = b->entries;
    bool mutated = false;
    for (Entry& e : change.upserts) {
      auto it = std::lower_bound(entries.begin(), entries.end(), e, entry_key_less);
      if (it != entries.end() && bytes_equal(it->key, e.key)) {
        if (!bytes_equal(it->value, e.value)) {
          it->value = e.value;
          mutated = true;
        }
      } else {
        entries.insert(it, e);
        mutated = true;
      }
    }
    for (const Bytes& key : change.removes) {
      auto it = find_in_bucket(entries, key);
      if (it != entries.end()) {
        entries.erase(it);
        mutated = true;
      }
    }
    if (!mutated) continue;
    changed[bucket_index] = put_node(MbtBucket{std::move(entries)});
  }
  if (changed.empty()) return base;

  for (std::uint32_t level = 1; level <= levels; ++level) {
    std::map<std::uint64_t, NodeId> parent_changed;
    for (auto it = changed.begin(); it != changed.end();) {
      const std::uint64_t parent_index = it->first / p.fanout;
      const std::uint64_t first_child = parent_index * p.fanout;
      const std::uint64_t child_count =
          std::min<std::uint64_t>(p.fanout, counts[level - 1] - first_child);
      MbtInternal node;
      node.children.reserve(child_count);
      for (std::uint64_t s = 0; s < child_count; ++s) {
        const std::uint64_t child_index = first_child + s;
        auto cit = changed.find(child_index);
        node.children.push_back(cit != changed.end() ? cit->second
                                                     : old_node(level - 1, child_index, old_node));
      }
      parent_changed[parent_index] = put_node(std::move(node));
      while (it != changed.end() && it->first / p.fanout == parent_index) ++it;
    }
    changed = std::move(parent_changed);
  }

  RootHandle out = root;
  out.root = changed.at(0);
  return out;
}

}  // namespace

RootHandle mbt_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats) {
  const MbtParams& p = params_of(root);
  std::map<std::uint64_t, BucketChange> changes;
  changes[mbt_bucket_of(key, p)].upserts.push_back(
      Entry{Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end())});
  return apply_changes(store, root, changes, stats);
}

RootHandle mbt_remove(NodeStore& store, const RootHandle& root, BytesView key, WriteStats* stats) {
  const MbtParams& p = params_of(root);
  std::map<std::uint64_t, BucketChange> changes;
  changes[mbt_bucket_of(key, p)].removes.push_back(Bytes(key.begin(), key.end()));
  return apply_changes(store, root, changes, stats);
}

RootHandle mbt_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                         WriteStats* stats) {
  const MbtParams& p = params_of(root);
  std::map<std::uint64_t, BucketChange> changes;
  for (const Entry& e : entries) {
    changes[mbt_bucket_of(e.key, p)].upserts.push_back(e);
  }
  return apply_changes(store, root, changes, stats);
}

Proof mbt_prove(const NodeStore& store, const RootHandle& root, BytesView key) {
  const MbtParams& p = params_of(root);
  if (root.empty()) throw UsageError("mbt_prove: key absent (empty index)");
  Proof proof;
  proof.kind = StructureKind::Mbt;
  proof.meta = root.meta;
  NodeId cur = *root.root;
  for (std::uint32_t step : mbt_path_to(mbt_bucket_of(key, p), p)) {
    const Bytes& bytes = fetch(store, cur, nullptr);
    proof.path_nodes.push_back(bytes);
    const MbtNode node = mbt_decode(bytes);
    const auto* in = std::get_if<MbtInternal>(&node);
    if (!in || step >= in->children.size()) throw CorruptionError("mbt: malformed internal path");
    cur = in->children[step];
  }
  const Bytes& bytes = fetch(store, cur, nullptr);
  proof.path_nodes.push_back(bytes);
  const MbtNode node = mbt_decode(bytes);
  const auto* b = std::get_if<MbtBucket>(&node);
  if (!b) throw CorruptionError("mbt: expected bucket at leaf level");
  if (find_in_bucket(b->entries, key) == b->entries.end()) {
    throw UsageError("mbt_prove: key absent");
  }
  return proof;
}

bool mbt_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof) {
  if (!std::holds_alternative<MbtParams>(proof.meta)) return false;
  const MbtParams& p = std::get<MbtParams>(proof.meta);
  std::vector<std::uint32_t> steps;
  try {
    steps = mbt_path_to(mbt_bucket_of(key, p), p);
  } catch (const UsageError&) {
    return false;
  }
  if (proof.path_nodes.size() != steps.size() + 1) return false;
  NodeId expect = digest;
  for (std::size_t i = 0; i < proof.path_nodes.size(); ++i) {
    const Bytes& bytes = proof.path_nodes[i];
    if (sha256(bytes) != expect) return false;
    MbtNode node;
    try {
      node = mbt_decode(bytes);
    } catch (const CorruptionError&) {
      return false;
    }
    if (i < steps.size()) {
      const auto* in = std::get_if<MbtInternal>(&node);
      if (!in || steps[i] >= in->children.size()) return false;
      expect = in->children[steps[i]];
    } else {
      const auto* b = std::get_if<MbtBucket>(&node);
      if (!b) return false;
      auto it = find_in_bucket(b->entries, key);
      return it != b->entries.end() && bytes_equal(it->value, expected_value);
    }
  }
  return false;
}

}  // namespace siri
