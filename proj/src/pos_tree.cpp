// SPDX-License-Identifier: Apache-2.0
#include "siri/pos_tree.hpp"

#include <algorithm>
#include <cmath>

#include "siri/chunker.hpp"
#include "siri/codec.hpp"
#include "siri/errors.hpp"

namespace siri {

PosParams PosParams::for_node_bytes(std::size_t target_bytes, std::size_t window_bytes) {
  if (target_bytes < 128) throw UsageError("pos: node size target too small");
  PosParams p;
  p.leaf.window_bytes = window_bytes;
  p.leaf.pattern_bits = static_cast<std::uint32_t>(std::lround(std::log2(double(target_bytes))));
  p.leaf.pattern_value = (std::uint64_t{1} << p.leaf.pattern_bits) - 1;
  p.leaf.min_chunk_bytes = std::max<std::size_t>(64, target_bytes / 4);
  p.leaf.max_chunk_bytes = 16 * target_bytes;
  // Internal items are a 32-byte id plus a short split key; aim the per-item
  // match probability so internal nodes come out near the same byte size.
  p.node_pattern_bits = std::max<std::uint32_t>(
      2, static_cast<std::uint32_t>(std::lround(std::log2(double(target_bytes) / 44.0))));
  p.node_pattern_value = (std::uint64_t{1} << p.node_pattern_bits) - 1;
  p.node_max_children = std::size_t{8} << p.node_pattern_bits;
  return p;
}

PosParams PosParams::ablate_structural_invariance(const PosParams& cfg) {
  PosParams p = cfg;
  const std::size_t target = cfg.leaf.expected_chunk_bytes();
  p.leaf.pattern_bits = 24;  // pattern effectively never found
  p.leaf.pattern_value = (std::uint64_t{1} << 24) - 1;
  p.leaf.max_chunk_bytes = 2 * target;
  p.leaf.min_chunk_bytes = std::min(cfg.leaf.min_chunk_bytes, target / 4);
  p.leaf.force_split_at_half = true;
  p.node_pattern_bits = 24;
  p.node_pattern_value = (std::uint64_t{1} << 24) - 1;
  p.node_max_children = std::max<std::size_t>(4, cfg.node_max_children / 4);
  p.node_force_split_at_half = true;
  p.local_edits_only = true;
  return p;
}

namespace {

constexpr std::uint8_t kTagInternal = 0;
constexpr std::uint8_t kTagLeaf = 1;

const PosParams& params_of(const RootHandle& root) {
  if (root.kind != StructureKind::Pos || !std::holds_alternative<PosParams>(root.meta)) {
    throw UsageError("pos: root handle is not a POS-Tree root");
  }
  return std::get<PosParams>(root.meta);
}

const Bytes& fetch(const NodeStore& store, const NodeId& id, std::uint64_t* visited) {
  const Bytes* b = store.find(id);
  if (!b) throw CorruptionError("pos: dangling node id " + id.hex());
  if (visited) ++*visited;
  return *b;
}

std::size_t entry_serialized_size(const Entry& e) { return 8 + e.key.size() + e.value.size(); }

struct PosWriter {
  NodeStore& store;
  WriteStats* stats;

  NodeId put_node(const PosNode& node, bool is_leaf) {
    bool added = false;
    const NodeId id = store.put(pos_encode(node), &added);
    if (stats && added) {
      ++stats->nodes_created;
      if (is_leaf) ++stats->leaf_nodes_created;
    }
    return id;
  }
};

// Content-defined grouping of entries into leaves. The rolling window and
// the min/max gates restart at every cut, making each group a pure function
// of its member entries; that is what lets an incremental update splice in
// reused nodes as soon as a cut position coincides with an old boundary.
class LeafCutter {
 public:
  explicit LeafCutter(const ChunkConfig& cfg)
      : cfg_(cfg), roller_(cfg.window_bytes), ring_(cfg.window_bytes) {}

  void push(Entry e, std::vector<std::vector<Entry>>& out) {
    const std::size_t size = entry_serialized_size(e);
    if (!matched_) scan(e);
    pending_.push_back(std::move(e));
    pending_sizes_.push_back(size);
    pending_bytes_ += size;
    if (matched_) {
      emit(out);
      return;
    }
    if (pending_bytes_ >= cfg_.max_chunk_bytes) forced(out);
  }

  void finish(std::vector<std::vector<Entry>>& out) {
    if (!pending_.empty()) emit(out);
  }

  bool pending_empty() const { return pending_.empty(); }

 private:
  void scan(const Entry& e) {
    Bytes bytes = entry_bytes(e);
    const std::size_t w = cfg_.window_bytes;
    for (std::uint8_t b : bytes) {
      const std::size_t slot = fed_ % w;
      if (fed_ < w) {
        roller_.feed(b);
      } else {
        roller_.roll(b, ring_[slot]);
      }
      ring_[slot] = b;
      ++fed_;
      if (fed_ >= w && fed_ >= cfg_.min_chunk_bytes &&
          RabinRoller::fingerprint_matches(roller_.fingerprint(), cfg_)) {
        matched_ = true;
        return;
      }
    }
  }

  void emit(std::vector<std::vector<Entry>>& out) {
    out.push_back(std::move(pending_));
    pending_.clear();
    pending_sizes_.clear();
    pending_bytes_ = 0;
    fed_ = 0;
    matched_ = false;
    roller_.reset();
  }

  void forced(std::vector<std::vector<Entry>>& out) {
    if (!cfg_.force_split_at_half) {
      emit(out);
      return;
    }
    // Ablation: cut at half the maximum size instead of at a content match.
    const std::size_t target = std::max<std::size_t>(1, cfg_.max_chunk_bytes / 2);
    std::size_t k = 1;
    std::size_t acc = pending_sizes_[0];
    while (k < pending_.size() && acc + pending_sizes_[k] <= target) {
      acc += pending_sizes_[k];
      ++k;
    }
    std::vector<Entry> rest(std::make_move_iterator(pending_.begin() + static_cast<std::ptrdiff_t>(k)),
                            std::make_move_iterator(pending_.end()));
    pending_.resize(k);
    emit(out);
    for (Entry& e : rest) push(std::move(e), out);
  }

  ChunkConfig cfg_;
  RabinRoller roller_;
  std::vector<std::uint8_t> ring_;
  std::size_t fed_ = 0;
  bool matched_ = false;
  std::vector<Entry> pending_;
  std::vector<std::size_t> pending_sizes_;
  std::size_t pending_bytes_ = 0;
};

// Grouping of (split_key, id) items into internal nodes: cut after an item
// whose id matches the pattern. A cut needs at least two pending items so
// every layer strictly shrinks and the build terminates.
class ItemCutter {
 public:
  explicit ItemCutter(const PosParams& p) : p_(p) {}

  void push(PosItem item, std::vector<std::vector<PosItem>>& out) {
    const bool match = hash_matches(item.child, p_.node_pattern_bits, p_.node_pattern_value);
    pending_.push_back(std::move(item));
    if (match && pending_.size() >= 2) {
      emit(out);
      return;
    }
    if (pending_.size() >= p_.node_max_children) {
      if (!p_.node_force_split_at_half) {
        emit(out);
        return;
      }
      const std::size_t k = std::max<std::size_t>(2, p_.node_max_children / 2);
      std::vector<PosItem> rest(std::make_move_iterator(pending_.begin() + static_cast<std::ptrdiff_t>(k)),
                                std::make_move_iterator(pending_.end()));
      pending_.resize(k);
      emit(out);
      pending_ = std::move(rest);
    }
  }

  void finish(std::vector<std::vector<PosItem>>& out) {
    if (!pending_.empty()) emit(out);
  }

  bool pending_empty() const { return pending_.empty(); }

 private:
  void emit(std::vector<std::vector<PosItem>>& out) {
    out.push_back(std::move(pending_));
    pending_.clear();
  }

  const PosParams& p_;
  std::vector<PosItem> pending_;
};

std::vector<PosItem> groups_to_leaf_items(PosWriter& w, std::vector<std::vector<Entry>>& groups) {
  std::vector<PosItem> items;
  items.reserve(groups.size());
  for (auto& g : groups) {
    PosItem item;
    item.split_key = g.back().key;
    item.child = w.put_node(PosLeaf{std::move(g)}, true);
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<PosItem> groups_to_internal_items(PosWriter& w,
                                              std::vector<std::vector<PosItem>>& groups) {
  std::vector<PosItem> items;
  items.reserve(groups.size());
  for (auto& g : groups) {
    PosItem item;
    item.split_key = g.back().split_key;
    item.child = w.put_node(PosInternal{std::move(g)}, false);
    items.push_back(std::move(item));
  }
  return items;
}

// Reduces an item list to a single root id, adding layers as needed.
std::optional<NodeId> build_up(PosWriter& w, const PosParams& p, std::vector<PosItem> items) {
  if (items.empty()) return std::nullopt;
  while (items.size() > 1) {
    ItemCutter cutter(p);
    std::vector<std::vector<PosItem>> groups;
    for (PosItem& it : items) cutter.push(std::move(it), groups);
    cutter.finish(groups);
    items = groups_to_internal_items(w, groups);
  }
  return items[0].child;
}

struct Frame {
  NodeId id;
  PosInternal node;
  std::size_t idx;  // child taken during descent
};

// Child slot for key: first item whose split key is >= key.
std::size_t nav_index(const PosInternal& node, BytesView key) {
  std::size_t lo = 0, hi = node.items.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (bytes_less(node.items[mid].split_key, key)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

struct Descent {
  std::vector<Frame> frames;
  NodeId leaf_id;
  PosLeaf leaf;
};

// Descends to the leaf responsible for key, clamping to the last child when
// the key exceeds every split key (insert position).
Descent descend(const NodeStore& store, const RootHandle& root, BytesView key,
                std::uint64_t* visited) {
  Descent d;
  NodeId cur = *root.root;
  for (;;) {
    PosNode node = pos_decode(fetch(store, cur, visited));
    if (auto* leaf = std::get_if<PosLeaf>(&node)) {
      d.leaf_id = cur;
      d.leaf = std::move(*leaf);
      return d;
    }
    auto& in = std::get<PosInternal>(node);
    if (in.items.empty()) throw CorruptionError("pos: empty internal node");
    std::size_t idx = nav_index(in, key);
    if (idx == in.items.size()) idx = in.items.size() - 1;
    const NodeId next = in.items[idx].child;
    d.frames.push_back(Frame{cur, std::move(in), idx});
    cur = next;
  }
}

// Enumerates nodes at a fixed depth in key order, strictly after the node
// the descent path passes through at that depth.
class SiblingWalker {
 public:
  SiblingWalker(const NodeStore& store, const std::vector<Frame>& frames, std::size_t depth,
                std::uint64_t* visited)
      : store_(store), visited_(visited), depth_(depth) {
    for (std::size_t k = 0; k < depth && k < frames.size(); ++k) {
      stack_.push_back(WFrame{frames[k].node, frames[k].idx + 1});
    }
  }

  std::optional<std::pair<NodeId, PosNode>> next() {
    while (!stack_.empty()) {
      WFrame& top = stack_.back();
      if (top.next >= top.node.items.size()) {
        stack_.pop_back();
        continue;
      }
      const NodeId child = top.node.items[top.next].child;
      ++top.next;
      PosNode node = pos_decode(fetch(store_, child, visited_));
      if (stack_.size() == depth_) return std::make_pair(child, std::move(node));
      auto* in = std::get_if<PosInternal>(&node);
      if (!in) throw CorruptionError("pos: leaf above leaf depth");
      stack_.push_back(WFrame{std::move(*in), 0});
    }
    return std::nullopt;
  }

 private:
  struct WFrame {
    PosInternal node;
    std::size_t next;
  };

  const NodeStore& store_;
  std::uint64_t* visited_;
  std::size_t depth_;
  std::vector<WFrame> stack_;
};

struct LevelOut {
  std::vector<PosItem> items;  // replacements for the consumed span
  std::size_t consumed = 0;    // old nodes at this depth covered by items
};

// Re-chunks the leaf layer starting at the edited leaf. Stops as soon as a
// cut lands exactly on a consumed-leaf end (everything after is reused), or
// at the layer end. Under local_only the detection never leaves the edited
// leaf.
LevelOut rechunk_leaves(PosWriter& w, const PosParams& p, std::vector<Entry> edited,
                        SiblingWalker& walker, bool local_only) {
  LeafCutter cutter(p.leaf);
  std::vector<std::vector<Entry>> groups;
  std::vector<Entry> supply = std::move(edited);
  std::size_t qi = 0;
  std::size_t consumed = 1;
  for (;;) {
    while (qi < supply.size()) {
      cutter.push(std::move(supply[qi]), groups);
      ++qi;
    }
    if (cutter.pending_empty()) break;  // cut coincides with an old boundary
    if (local_only) {
      cutter.finish(groups);
      break;
    }
    auto nxt = walker.next();
    if (!nxt) {
      cutter.finish(groups);
      break;
    }
    auto* leaf = std::get_if<PosLeaf>(&nxt->second);
    if (!leaf) throw CorruptionError("pos: internal node at leaf depth");
    ++consumed;
    for (Entry& e : leaf->entries) supply.push_back(std::move(e));
  }
  LevelOut out;
  out.items = groups_to_leaf_items(w, groups);
  out.consumed = consumed;
  return out;
}

LevelOut rechunk_items(PosWriter& w, const PosParams& p, std::vector<PosItem> supply,
                       std::size_t covered, SiblingWalker& walker, bool local_only) {
  ItemCutter cutter(p);
  std::vector<std::vector<PosItem>> groups;
  std::size_t qi = 0;
  std::size_t consumed = covered;
  for (;;) {
    while (qi < supply.size()) {
      cutter.push(std::move(supply[qi]), groups);
      ++qi;
    }
    if (cutter.pending_empty()) break;
    if (local_only) {
      cutter.finish(groups);
      break;
    }
    auto nxt = walker.next();
    if (!nxt) {
      cutter.finish(groups);
      break;
    }
    auto* in = std::get_if<PosInternal>(&nxt->second);
    if (!in) throw CorruptionError("pos: leaf at internal depth");
    ++consumed;
    for (PosItem& it : in->items) supply.push_back(std::move(it));
  }
  LevelOut out;
  out.items = groups_to_internal_items(w, groups);
  out.consumed = consumed;
  return out;
}

// Items of the depth-d segment that replaces the consumed child span:
// untouched predecessors from the path node, the replacement items, then the
// leftovers of the last covered node. Also reports how many depth-d nodes
// the span covers.
std::pair<std::vector<PosItem>, std::size_t> build_supply(const Frame& frame, LevelOut& child_out,
                                                          SiblingWalker& walker) {
  std::vector<PosItem> supply(frame.node.items.begin(),
                              frame.node.items.begin() + static_cast<std::ptrdiff_t>(frame.idx));
  for (PosItem& it : child_out.items) supply.push_back(std::move(it));
  std::size_t covered = 1;
  std::size_t remaining = child_out.consumed;
  const std::size_t avail = frame.node.items.size() - frame.idx;
  if (remaining <= avail) {
    supply.insert(supply.end(),
                  frame.node.items.begin() + static_cast<std::ptrdiff_t>(frame.idx + remaining),
                  frame.node.items.end());
  } else {
    remaining -= avail;
    for (;;) {
      auto nxt = walker.next();
      if (!nxt) throw CorruptionError("pos: consumed span exceeds layer");
      auto* in = std::get_if<PosInternal>(&nxt->second);
      if (!in) throw CorruptionError("pos: leaf at internal depth");
      ++covered;
      if (remaining <= in->items.size()) {
        supply.insert(supply.end(), in->items.begin() + static_cast<std::ptrdiff_t>(remaining),
                      in->items.end());
        break;
      }
      remaining -= in->items.size();
    }
  }
  return {std::move(supply), covered};
}

RootHandle apply_leaf_edit(NodeStore& store, const RootHandle& root, Descent& d,
                           std::vector<Entry> edited_entries, WriteStats* stats) {
  const PosParams& p = params_of(root);
  PosWriter w{store, stats};
  std::uint64_t* visited = stats ? &stats->nodes_visited : nullptr;

  SiblingWalker leaf_walker(store, d.frames, d.frames.size(), visited);
  LevelOut out = rechunk_leaves(w, p, std::move(edited_entries), leaf_walker, p.local_edits_only);

  for (std::size_t level = d.frames.size(); level-- > 1;) {
    SiblingWalker walker(store, d.frames, level, visited);
    auto [supply, covered] = build_supply(d.frames[level], out, walker);
    out = rechunk_items(w, p, std::move(supply), covered, walker, p.local_edits_only);
  }

  std::vector<PosItem> top;
  if (d.frames.empty()) {
    top = std::move(out.items);
  } else {
    SiblingWalker walker(store, d.frames, 0, visited);
    auto [supply, covered] = build_supply(d.frames[0], out, walker);
    top = std::move(supply);
  }
  RootHandle result = root;
  result.root = build_up(w, p, std::move(top));
  return result;
}

void validate_params(const PosParams& p) {
  if (p.leaf.min_chunk_bytes >= p.leaf.max_chunk_bytes) {
    throw UsageError("pos: min_chunk_bytes must be below max_chunk_bytes");
  }
  if (p.node_max_children < 2) throw UsageError("pos: node_max_children must be >= 2");
  if (p.leaf.window_bytes == 0) throw UsageError("pos: window must be positive");
}

void validate_key(BytesView key) {
  if (key.empty() || key.size() > 1024) throw UsageError("pos: key length out of range");
}

}  // namespace

Bytes pos_encode(const PosNode& node) {
  Bytes out;
  if (const auto* leaf = std::get_if<PosLeaf>(&node)) {
    append_u8(out, kTagLeaf);
    append_u32le(out, static_cast<std::uint32_t>(leaf->entries.size()));
    for (const Entry& e : leaf->entries) append_entry(out, e);
  } else {
    const auto& in = std::get<PosInternal>(node);
    append_u8(out, kTagInternal);
    append_u32le(out, static_cast<std::uint32_t>(in.items.size()));
    for (const PosItem& it : in.items) {
      append_u32le(out, static_cast<std::uint32_t>(it.split_key.size()));
      append_bytes(out, it.split_key);
      append_node_id(out, it.child);
    }
  }
  return out;
}

PosNode pos_decode(BytesView bytes) {
  ByteReader r(bytes);
  const std::uint8_t tag = r.u8();
  if (tag == kTagLeaf) {
    PosLeaf leaf;
    const std::uint32_t count = r.u32le();
    leaf.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) leaf.entries.push_back(read_entry(r));
    return leaf;
  }
  if (tag == kTagInternal) {
    PosInternal in;
    const std::uint32_t count = r.u32le();
    in.items.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      PosItem it;
      it.split_key = r.bytes(r.u32le());
      it.child = r.node_id();
      in.items.push_back(std::move(it));
    }
    return in;
  }
  throw CorruptionError("pos: unknown node tag");
}

RootHandle pos_build(NodeStore& store, const PosParams& params, std::span<const Entry> entries,
                     WriteStats* stats) {
  validate_params(params);
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
    if (bytes_compare(entries[i].key, entries[i + 1].key) >= 0) {
      throw UsageError("pos_build: entries must be sorted with unique keys");
    }
  }
  RootHandle root;
  root.kind = StructureKind::Pos;
  root.meta = params;
  if (entries.empty()) return root;

  PosWriter w{store, stats};
  LeafCutter cutter(params.leaf);
  std::vector<std::vector<Entry>> groups;
  for (const Entry& e : entries) cutter.push(e, groups);
  cutter.finish(groups);
  std::vector<PosItem> items = groups_to_leaf_items(w, groups);
  root.root = build_up(w, params, std::move(items));
  return root;
}

std::optional<Bytes> pos_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats) {
  params_of(root);
  if (root.empty()) return std::nullopt;
  std::uint64_t* visited = stats ? &stats->nodes_visited : nullptr;
  NodeId cur = *root.root;
  for (;;) {
    PosNode node = pos_decode(fetch(store, cur, visited));
    if (const auto* leaf = std::get_if<PosLeaf>(&node)) {
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      if (it != leaf->entries.end() && bytes_equal(it->key, key)) return it->value;
      return std::nullopt;
    }
    const auto& in = std::get<PosInternal>(node);
    const std::size_t idx = nav_index(in, key);
    if (idx == in.items.size()) return std::nullopt;
    cur = in.items[idx].child;
  }
}

RootHandle pos_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats) {
  const PosParams& p = params_of(root);
  validate_params(p);
  validate_key(key);
  if (root.empty()) {
    Entry e{Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end())};
    RootHandle fresh = pos_build(store, p, std::span<const Entry>(&e, 1), stats);
    fresh.meta = root.meta;
    return fresh;
  }
  Descent d = descend(store, root, key, stats ? &stats->nodes_visited : nullptr);
  std::vector<Entry> entries = std::move(d.leaf.entries);
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
  if (it != entries.end() && bytes_equal(it->key, key)) {
    if (bytes_equal(it->value, value)) return root;
    it->value = Bytes(value.begin(), value.end());
  } else {
    entries.insert(it, Entry{Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end())});
  }
  return apply_leaf_edit(store, root, d, std::move(entries), stats);
}

RootHandle pos_remove(NodeStore& store, const RootHandle& root, BytesView key, WriteStats* stats) {
  const PosParams& p = params_of(root);
  validate_params(p);
  if (root.empty()) return root;
  Descent d = descend(store, root, key, stats ? &stats->nodes_visited : nullptr);
  std::vector<Entry> entries = std::move(d.leaf.entries);
  auto it = std::lower_bound(entries.begin(), entries.end(), key,
                             [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
  if (it == entries.end() || !bytes_equal(it->key, key)) return root;
  entries.erase(it);
  return apply_leaf_edit(store, root, d, std::move(entries), stats);
}

RootHandle pos_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                         WriteStats* stats) {
  const PosParams& p = params_of(root);
  std::vector<Entry> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end(), entry_key_less);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (bytes_equal(sorted[i].key, sorted[i + 1].key)) {
      throw UsageError("pos_put_batch: duplicate keys in batch");
    }
  }
  if (root.empty()) {
    RootHandle fresh = pos_build(store, p, sorted, stats);
    fresh.meta = root.meta;
    return fresh;
  }
  RootHandle cur = root;
  for (const Entry& e : sorted) cur = pos_insert(store, cur, e.key, e.value, stats);
  return cur;
}

Proof pos_prove(const NodeStore& store, const RootHandle& root, BytesView key) {
  params_of(root);
  Proof proof;
  proof.kind = StructureKind::Pos;
  proof.meta = root.meta;
  if (root.empty()) throw UsageError("pos_prove: key absent (empty index)");
  NodeId cur = *root.root;
  for (;;) {
    const Bytes& bytes = fetch(store, cur, nullptr);
    proof.path_nodes.push_back(bytes);
    PosNode node = pos_decode(bytes);
    if (const auto* leaf = std::get_if<PosLeaf>(&node)) {
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      if (it != leaf->entries.end() && bytes_equal(it->key, key)) return proof;
      throw UsageError("pos_prove: key absent");
    }
    const auto& in = std::get<PosInternal>(node);
    const std::size_t idx = nav_index(in, key);
    if (idx == in.items.size()) throw UsageError("pos_prove: key absent");
    cur = in.items[idx].child;
  }
}

bool pos_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof) {
  if (proof.path_nodes.empty()) return false;
  NodeId expect = digest;
  for (std::size_t i = 0; i < proof.path_nodes.size(); ++i) {
    const Bytes& bytes = proof.path_nodes[i];
    if (sha256(bytes) != expect) return false;
    PosNode node;
    try {
      node = pos_decode(bytes);
    } catch (const CorruptionError&) {
      return false;
    }
    const bool last = i + 1 == proof.path_nodes.size();
    if (const auto* leaf = std::get_if<PosLeaf>(&node)) {
      if (!last) return false;
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      return it != leaf->entries.end() && bytes_equal(it->key, key) &&
             bytes_equal(it->value, expected_value);
    }
    if (last) return false;
    const auto& in = std::get<PosInternal>(node);
    const std::size_t idx = nav_index(in, key);
    if (idx == in.items.size()) return false;
    expect = in.items[idx].child;
  }
  return false;
}

std::size_t pos_height(const NodeStore& store, const RootHandle& root) {
  params_of(root);
  if (root.empty()) return 0;
  std::size_t height = 1;
  NodeId cur = *root.root;
  for (;;) {
    PosNode node = pos_decode(fetch(store, cur, nullptr));
    if (std::holds_alternative<PosLeaf>(node)) return height;
    const auto& in = std::get<PosInternal>(node);
    if (in.items.empty()) throw CorruptionError("pos: empty internal node");
    cur = in.items.front().child;
    ++height;
  }
}

namespace {

void collect_rec(const NodeStore& store, const NodeId& id, std::vector<Entry>& out) {
  PosNode node = pos_decode(fetch(store, id, nullptr));
  if (auto* leaf = std::get_if<PosLeaf>(&node)) {
    for (Entry& e : leaf->entries) out.push_back(std::move(e));
    return;
  }
  for (const PosItem& it : std::get<PosInternal>(node).items) collect_rec(store, it.child, out);
}

}  // namespace

std::vector<Entry> pos_collect_entries(const NodeStore& store, const RootHandle& root) {
  std::vector<Entry> out;
  if (!root.empty()) collect_rec(store, *root.root, out);
  return out;
}

}  // namespace siri
