// SPDX-License-Identifier: Apache-2.0
#include "siri/mvmb_tree.hpp"

#include <algorithm>

#include "siri/codec.hpp"
#include "siri/errors.hpp"

namespace siri {

namespace {

constexpr std::uint8_t kTagInternal = 0;
constexpr std::uint8_t kTagLeaf = 1;

const MvmbParams& params_of(const RootHandle& root) {
  if (root.kind != StructureKind::Mvmb || !std::holds_alternative<MvmbParams>(root.meta)) {
    throw UsageError("mvmb: root handle is not an MVMB+-Tree root");
  }
  const auto& p = std::get<MvmbParams>(root.meta);
  if (p.order < 3) throw UsageError("mvmb: order must be >= 3");
  return p;
}

std::size_t leaf_capacity(const MvmbParams& p) { return p.order - 1; }
std::size_t leaf_min(const MvmbParams& p) { return (p.order - 1 + 1) / 2; }  // ceil((d-1)/2)
std::size_t internal_min(const MvmbParams& p) { return (p.order + 1) / 2; }  // ceil(d/2)

const Bytes& fetch(const NodeStore& store, const NodeId& id, std::uint64_t* visited) {
  const Bytes* b = store.find(id);
  if (!b) throw CorruptionError("mvmb: dangling node id " + id.hex());
  if (visited) ++*visited;
  return *b;
}

struct MvmbWriter {
  NodeStore& store;
  WriteStats* stats;

  NodeId put_node(const MvmbNode& node) {
    bool added = false;
    const NodeId id = store.put(mvmb_encode(node), &added);
    if (stats && added) {
      ++stats->nodes_created;
      if (std::holds_alternative<MvmbLeaf>(node)) ++stats->leaf_nodes_created;
    }
    return id;
  }
  const Bytes& read(const NodeId& id) {
    return fetch(store, id, stats ? &stats->nodes_visited : nullptr);
  }
};

// Child slot for key: first separator >= key, else the last child.
std::size_t nav_index(const MvmbInternal& node, BytesView key) {
  std::size_t lo = 0, hi = node.separators.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (bytes_less(node.separators[mid], key)) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

struct InsertRes {
  bool changed = true;
  bool split = false;
  NodeId id;           // when !split
  NodeId left, right;  // when split
  Bytes sep;
};

InsertRes insert_rec(MvmbWriter& w, const MvmbParams& p, const NodeId& node_id, BytesView key,
                     BytesView value) {
  MvmbNode node = mvmb_decode(w.read(node_id));

  if (auto* leaf = std::get_if<MvmbLeaf>(&node)) {
    auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                               [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
    if (it != leaf->entries.end() && bytes_equal(it->key, key)) {
      if (bytes_equal(it->value, value)) return InsertRes{false};
      it->value = Bytes(value.begin(), value.end());
    } else {
      leaf->entries.insert(it, Entry{Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end())});
    }
    if (leaf->entries.size() <= leaf_capacity(p)) {
      return InsertRes{true, false, w.put_node(node)};
    }
    const std::size_t lc = (leaf->entries.size() + 1) / 2;  // ceil(n/2)
    MvmbLeaf left{std::vector<Entry>(leaf->entries.begin(),
                                     leaf->entries.begin() + static_cast<std::ptrdiff_t>(lc))};
    MvmbLeaf right{std::vector<Entry>(leaf->entries.begin() + static_cast<std::ptrdiff_t>(lc),
                                      leaf->entries.end())};
    InsertRes res;
    res.split = true;
    res.sep = left.entries.back().key;
    res.left = w.put_node(left);
    res.right = w.put_node(right);
    return res;
  }

  auto& in = std::get<MvmbInternal>(node);
  const std::size_t idx = nav_index(in, key);
  InsertRes r = insert_rec(w, p, in.children[idx], key, value);
  if (!r.changed) return InsertRes{false};
  if (!r.split) {
    in.children[idx] = r.id;
    return InsertRes{true, false, w.put_node(node)};
  }
  in.children[idx] = r.left;
  in.children.insert(in.children.begin() + static_cast<std::ptrdiff_t>(idx + 1), r.right);
  in.separators.insert(in.separators.begin() + static_cast<std::ptrdiff_t>(idx), r.sep);
  if (in.children.size() <= p.order) {
    return InsertRes{true, false, w.put_node(node)};
  }
  const std::size_t lc = (in.children.size() + 1) / 2;
  MvmbInternal left;
  left.children.assign(in.children.begin(), in.children.begin() + static_cast<std::ptrdiff_t>(lc));
  left.separators.assign(in.separators.begin(),
                         in.separators.begin() + static_cast<std::ptrdiff_t>(lc - 1));
  MvmbInternal right;
  right.children.assign(in.children.begin() + static_cast<std::ptrdiff_t>(lc), in.children.end());
  right.separators.assign(in.separators.begin() + static_cast<std::ptrdiff_t>(lc),
                          in.separators.end());
  InsertRes res;
  res.split = true;
  res.sep = in.separators[lc - 1];
  res.left = w.put_node(left);
  res.right = w.put_node(right);
  return res;
}

struct RemoveRes {
  bool changed = false;
  MvmbNode node;  // unstored when changed
};

bool underflows(const MvmbParams& p, const MvmbNode& node) {
  if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) return leaf->entries.size() < leaf_min(p);
  return std::get<MvmbInternal>(node).children.size() < internal_min(p);
}

RemoveRes remove_rec(MvmbWriter& w, const MvmbParams& p, const NodeId& node_id, BytesView key) {
  MvmbNode node = mvmb_decode(w.read(node_id));

  if (auto* leaf = std::get_if<MvmbLeaf>(&node)) {
    auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                               [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
    if (it == leaf->entries.end() || !bytes_equal(it->key, key)) return RemoveRes{};
    leaf->entries.erase(it);
    return RemoveRes{true, std::move(node)};
  }

  auto& in = std::get<MvmbInternal>(node);
  const std::size_t idx = nav_index(in, key);
  RemoveRes r = remove_rec(w, p, in.children[idx], key);
  if (!r.changed) return RemoveRes{};

  if (!underflows(p, r.node)) {
    in.children[idx] = w.put_node(r.node);
    return RemoveRes{true, std::move(node)};
  }

  // Rebalance with the left sibling when one exists, otherwise the right.
  const bool use_left = idx > 0;
  const std::size_t sib_idx = use_left ? idx - 1 : idx + 1;
  MvmbNode sibling = mvmb_decode(w.read(in.children[sib_idx]));

  if (auto* child_leaf = std::get_if<MvmbLeaf>(&r.node)) {
    auto& sib_leaf = std::get<MvmbLeaf>(sibling);
    if (sib_leaf.entries.size() > leaf_min(p)) {
      if (use_left) {
        child_leaf->entries.insert(child_leaf->entries.begin(), std::move(sib_leaf.entries.back()));
        sib_leaf.entries.pop_back();
        in.separators[idx - 1] = sib_leaf.entries.back().key;
      } else {
        child_leaf->entries.push_back(std::move(sib_leaf.entries.front()));
        sib_leaf.entries.erase(sib_leaf.entries.begin());
        in.separators[idx] = child_leaf->entries.back().key;
      }
      in.children[idx] = w.put_node(r.node);
      in.children[sib_idx] = w.put_node(sibling);
      return RemoveRes{true, std::move(node)};
    }
    // Merge the two leaves and drop the separator between them.
    MvmbLeaf merged;
    if (use_left) {
      merged.entries = std::move(sib_leaf.entries);
      merged.entries.insert(merged.entries.end(), child_leaf->entries.begin(),
                            child_leaf->entries.end());
    } else {
      merged.entries = std::move(child_leaf->entries);
      merged.entries.insert(merged.entries.end(), sib_leaf.entries.begin(), sib_leaf.entries.end());
    }
    const std::size_t left_pos = use_left ? idx - 1 : idx;
    in.children[left_pos] = w.put_node(merged);
    in.children.erase(in.children.begin() + static_cast<std::ptrdiff_t>(left_pos + 1));
    in.separators.erase(in.separators.begin() + static_cast<std::ptrdiff_t>(left_pos));
    return RemoveRes{true, std::move(node)};
  }

  auto& child_in = std::get<MvmbInternal>(r.node);
  auto& sib_in = std::get<MvmbInternal>(sibling);
  if (sib_in.children.size() > internal_min(p)) {
    if (use_left) {
      child_in.children.insert(child_in.children.begin(), sib_in.children.back());
      child_in.separators.insert(child_in.separators.begin(), std::move(in.separators[idx - 1]));
      in.separators[idx - 1] = std::move(sib_in.separators.back());
      sib_in.children.pop_back();
      sib_in.separators.pop_back();
    } else {
      child_in.children.push_back(sib_in.children.front());
      child_in.separators.push_back(std::move(in.separators[idx]));
      in.separators[idx] = std::move(sib_in.separators.front());
      sib_in.children.erase(sib_in.children.begin());
      sib_in.separators.erase(sib_in.separators.begin());
    }
    in.children[idx] = w.put_node(r.node);
    in.children[sib_idx] = w.put_node(sibling);
    return RemoveRes{true, std::move(node)};
  }
  // Merge internals through the separator between them.
  MvmbInternal merged;
  const std::size_t left_pos = use_left ? idx - 1 : idx;
  MvmbInternal& left = use_left ? sib_in : child_in;
  MvmbInternal& right = use_left ? child_in : sib_in;
  merged.children = std::move(left.children);
  merged.children.insert(merged.children.end(), right.children.begin(), right.children.end());
  merged.separators = std::move(left.separators);
  merged.separators.push_back(in.separators[left_pos]);
  merged.separators.insert(merged.separators.end(), right.separators.begin(),
                           right.separators.end());
  in.children[left_pos] = w.put_node(merged);
  in.children.erase(in.children.begin() + static_cast<std::ptrdiff_t>(left_pos + 1));
  in.separators.erase(in.separators.begin() + static_cast<std::ptrdiff_t>(left_pos));
  return RemoveRes{true, std::move(node)};
}

}  // namespace

Bytes mvmb_encode(const MvmbNode& node) {
  Bytes out;
  if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) {
    append_u8(out, kTagLeaf);
    append_u32le(out, static_cast<std::uint32_t>(leaf->entries.size()));
    for (const Entry& e : leaf->entries) append_entry(out, e);
  } else {
    const auto& in = std::get<MvmbInternal>(node);
    append_u8(out, kTagInternal);
    append_u32le(out, static_cast<std::uint32_t>(in.children.size()));
    for (const NodeId& id : in.children) append_node_id(out, id);
    append_u32le(out, static_cast<std::uint32_t>(in.separators.size()));
    for (const Bytes& s : in.separators) {
      append_u32le(out, static_cast<std::uint32_t>(s.size()));
      append_bytes(out, s);
    }
  }
  return out;
}

MvmbNode mvmb_decode(BytesView bytes) {
  ByteReader r(bytes);
  const std::uint8_t tag = r.u8();
  if (tag == kTagLeaf) {
    MvmbLeaf leaf;
    const std::uint32_t count = r.u32le();
    leaf.entries.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) leaf.entries.push_back(read_entry(r));
    return leaf;
  }
  if (tag == kTagInternal) {
    MvmbInternal in;
    const std::uint32_t nchildren = r.u32le();
    in.children.reserve(nchildren);
    for (std::uint32_t i = 0; i < nchildren; ++i) in.children.push_back(r.node_id());
    const std::uint32_t nseps = r.u32le();
    if (nseps + 1 != nchildren) throw CorruptionError("mvmb: separator count mismatch");
    in.separators.reserve(nseps);
    for (std::uint32_t i = 0; i < nseps; ++i) in.separators.push_back(r.bytes(r.u32le()));
    return in;
  }
  throw CorruptionError("mvmb: unknown node tag");
}

std::optional<Bytes> mvmb_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                 ReadStats* stats) {
  params_of(root);
  if (root.empty()) return std::nullopt;
  std::uint64_t* visited = stats ? &stats->nodes_visited : nullptr;
  NodeId cur = *root.root;
  for (;;) {
    MvmbNode node = mvmb_decode(fetch(store, cur, visited));
    if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) {
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      if (it != leaf->entries.end() && bytes_equal(it->key, key)) return it->value;
      return std::nullopt;
    }
    const auto& in = std::get<MvmbInternal>(node);
    cur = in.children[nav_index(in, key)];
  }
}

RootHandle mvmb_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                       WriteStats* stats) {
  const MvmbParams& p = params_of(root);
  if (key.empty() || key.size() > 1024) throw UsageError("mvmb_insert: key length out of range");
  MvmbWriter w{store, stats};
  RootHandle out = root;
  if (root.empty()) {
    out.root = w.put_node(
        MvmbLeaf{{Entry{Bytes(key.begin(), key.end()), Bytes(value.begin(), value.end())}}});
    return out;
  }
  InsertRes r = insert_rec(w, p, *root.root, key, value);
  if (!r.changed) return root;
  if (!r.split) {
    out.root = r.id;
    return out;
  }
  MvmbInternal new_root;
  new_root.children = {r.left, r.right};
  new_root.separators = {std::move(r.sep)};
  out.root = w.put_node(new_root);
  return out;
}

RootHandle mvmb_remove(NodeStore& store, const RootHandle& root, BytesView key, WriteStats* stats) {
  const MvmbParams& p = params_of(root);
  if (root.empty()) return root;
  MvmbWriter w{store, stats};
  RemoveRes r = remove_rec(w, p, *root.root, key);
  if (!r.changed) return root;
  RootHandle out = root;
  // Collapse a trivial root.
  for (;;) {
    if (auto* leaf = std::get_if<MvmbLeaf>(&r.node)) {
      if (leaf->entries.empty()) {
        out.root.reset();
        return out;
      }
      break;
    }
    auto& in = std::get<MvmbInternal>(r.node);
    if (in.children.size() > 1) break;
    const NodeId only = in.children[0];
    out.root = only;
    return out;
  }
  out.root = w.put_node(r.node);
  return out;
}

RootHandle mvmb_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                          WriteStats* stats) {
  params_of(root);
  std::vector<Entry> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end(), entry_key_less);
  for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
    if (bytes_equal(sorted[i].key, sorted[i + 1].key)) {
      throw UsageError("mvmb_put_batch: duplicate keys in batch");
    }
  }
  RootHandle cur = root;
  for (const Entry& e : entries) cur = mvmb_insert(store, cur, e.key, e.value, stats);
  return cur;
}

Proof mvmb_prove(const NodeStore& store, const RootHandle& root, BytesView key) {
  params_of(root);
  Proof proof;
  proof.kind = StructureKind::Mvmb;
  proof.meta = root.meta;
  if (root.empty()) throw UsageError("mvmb_prove: key absent (empty index)");
  NodeId cur = *root.root;
  for (;;) {
    const Bytes& bytes = fetch(store, cur, nullptr);
    proof.path_nodes.push_back(bytes);
    MvmbNode node = mvmb_decode(bytes);
    if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) {
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      if (it != leaf->entries.end() && bytes_equal(it->key, key)) return proof;
      throw UsageError("mvmb_prove: key absent");
    }
    const auto& in = std::get<MvmbInternal>(node);
    cur = in.children[nav_index(in, key)];
  }
}

bool mvmb_verify(const NodeId& digest, BytesView key, BytesView expected_value,
                 const Proof& proof) {
  if (proof.path_nodes.empty()) return false;
  NodeId expect = digest;
  for (std::size_t i = 0; i < proof.path_nodes.size(); ++i) {
    const Bytes& bytes = proof.path_nodes[i];
    if (sha256(bytes) != expect) return false;
    MvmbNode node;
    try {
      node = mvmb_decode(bytes);
    } catch (const CorruptionError&) {
      return false;
    }
    const bool last = i + 1 == proof.path_nodes.size();
    if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) {
      if (!last) return false;
      auto it = std::lower_bound(leaf->entries.begin(), leaf->entries.end(), key,
                                 [](const Entry& e, BytesView k) { return bytes_less(e.key, k); });
      return it != leaf->entries.end() && bytes_equal(it->key, key) &&
             bytes_equal(it->value, expected_value);
    }
    if (last) return false;
    const auto& in = std::get<MvmbInternal>(node);
    expect = in.children[nav_index(in, key)];
  }
  return false;
}

std::size_t mvmb_height(const NodeStore& store, const RootHandle& root) {
  params_of(root);
  if (root.empty()) return 0;
  std::size_t height = 1;
  NodeId cur = *root.root;
  for (;;) {
    MvmbNode node = mvmb_decode(fetch(store, cur, nullptr));
    if (std::holds_alternative<MvmbLeaf>(node)) return height;
    cur = std::get<MvmbInternal>(node).children[0];
    ++height;
  }
}

namespace {

// Returns leaf depth; checks occupancy and key ordering within [lo, hi).
std::size_t check_rec(const NodeStore& store, const MvmbParams& p, const NodeId& id, bool is_root,
                      const Bytes* lo, const Bytes* hi) {
  const MvmbNode node = mvmb_decode(fetch(store, id, nullptr));
  if (const auto* leaf = std::get_if<MvmbLeaf>(&node)) {
    if (!is_root && leaf->entries.size() < leaf_min(p)) {
      throw CorruptionError("mvmb invariant: leaf underflow");
    }
    if (leaf->entries.size() > leaf_capacity(p)) {
      throw CorruptionError("mvmb invariant: leaf overflow");
    }
    for (std::size_t i = 0; i < leaf->entries.size(); ++i) {
      if (i > 0 && !bytes_less(leaf->entries[i - 1].key, leaf->entries[i].key)) {
        throw CorruptionError("mvmb invariant: leaf keys out of order");
      }
      if (lo && !bytes_less(*lo, leaf->entries[i].key)) {
        throw CorruptionError("mvmb invariant: key below range");
      }
      if (hi && bytes_less(*hi, leaf->entries[i].key)) {
        throw CorruptionError("mvmb invariant: key above range");
      }
    }
    return 1;
  }
  const auto& in = std::get<MvmbInternal>(node);
  if (in.children.size() > p.order) throw CorruptionError("mvmb invariant: internal overflow");
  const std::size_t min_children = is_root ? 2 : internal_min(p);
  if (in.children.size() < min_children) throw CorruptionError("mvmb invariant: internal underflow");
  for (std::size_t i = 1; i < in.separators.size(); ++i) {
    if (!bytes_less(in.separators[i - 1], in.separators[i])) {
      throw CorruptionError("mvmb invariant: separators out of order");
    }
  }
  std::size_t depth = 0;
  for (std::size_t i = 0; i < in.children.size(); ++i) {
    const Bytes* child_lo = i == 0 ? lo : &in.separators[i - 1];
    const Bytes* child_hi = i == in.separators.size() ? hi : &in.separators[i];
    const std::size_t d = check_rec(store, p, in.children[i], false, child_lo, child_hi);
    if (i == 0) {
      depth = d;
    } else if (d != depth) {
      throw CorruptionError("mvmb invariant: non-uniform leaf depth");
    }
  }
  return depth + 1;
}

}  // namespace

void mvmb_check_invariants(const NodeStore& store, const RootHandle& root) {
  const MvmbParams& p = params_of(root);
  if (root.empty()) return;
  check_rec(store, p, *root.root, true, nullptr, nullptr);
}

}  // namespace siri
