// SPDX-License-Identifier: Apache-2.0
#include "siri/index.hpp"

#include <algorithm>

#include "siri/errors.hpp"
#include "siri/mbt.hpp"
#include "siri/mpt.hpp"
#include "siri/mvmb_tree.hpp"
#include "siri/pos_tree.hpp"

namespace siri {

const char* structure_name(StructureKind kind) {
  switch (kind) {
    case StructureKind::Mpt:
      return "mpt";
    case StructureKind::Mbt:
      return "mbt";
    case StructureKind::Pos:
      return "pos";
    case StructureKind::Mvmb:
      return "mvmb";
  }
  return "?";
}

std::optional<StructureKind> structure_from_name(const std::string& name) {
  if (name == "mpt") return StructureKind::Mpt;
  if (name == "mbt") return StructureKind::Mbt;
  if (name == "pos") return StructureKind::Pos;
  if (name == "mvmb") return StructureKind::Mvmb;
  return std::nullopt;
}

RootHandle empty_root(StructureKind kind) {
  switch (kind) {
    case StructureKind::Mpt:
      return empty_root(kind, MptParams{});
    case StructureKind::Mbt:
      return empty_root(kind, MbtParams{});
    case StructureKind::Pos:
      return empty_root(kind, PosParams::for_node_bytes(1024));
    case StructureKind::Mvmb:
      return empty_root(kind, MvmbParams{});
  }
  throw UsageError("empty_root: unknown structure kind");
}

RootHandle empty_root(StructureKind kind, IndexMeta meta) {
  RootHandle root;
  root.kind = kind;
  root.meta = std::move(meta);
  return root;
}

std::optional<Bytes> index_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                  ReadStats* stats) {
  switch (root.kind) {
    case StructureKind::Mpt:
      return mpt_lookup(store, root, key, stats);
    case StructureKind::Mbt:
      return mbt_lookup(store, root, key, stats);
    case StructureKind::Pos:
      return pos_lookup(store, root, key, stats);
    case StructureKind::Mvmb:
      return mvmb_lookup(store, root, key, stats);
  }
  throw UsageError("lookup: unknown structure kind");
}

RootHandle index_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                        WriteStats* stats) {
  switch (root.kind) {
    case StructureKind::Mpt:
      return mpt_insert(store, root, key, value, stats);
    case StructureKind::Mbt:
      return mbt_insert(store, root, key, value, stats);
    case StructureKind::Pos:
      return pos_insert(store, root, key, value, stats);
    case StructureKind::Mvmb:
      return mvmb_insert(store, root, key, value, stats);
  }
  throw UsageError("insert: unknown structure kind");
}

RootHandle index_remove(NodeStore& store, const RootHandle& root, BytesView key,
                        WriteStats* stats) {
  switch (root.kind) {
    case StructureKind::Mpt:
      return mpt_remove(store, root, key, stats);
    case StructureKind::Mbt:
      return mbt_remove(store, root, key, stats);
    case StructureKind::Pos:
      return pos_remove(store, root, key, stats);
    case StructureKind::Mvmb:
      return mvmb_remove(store, root, key, stats);
  }
  throw UsageError("remove: unknown structure kind");
}

RootHandle index_put_batch(NodeStore& store, const RootHandle& root, std::span<const Entry> entries,
                           WriteStats* stats) {
  switch (root.kind) {
    case StructureKind::Mbt: {
      // Bottom-up batch: duplicate keys would be ambiguous, reject them.
      std::vector<Entry> sorted(entries.begin(), entries.end());
      std::sort(sorted.begin(), sorted.end(), entry_key_less);
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (bytes_equal(sorted[i].key, sorted[i + 1].key)) {
          throw UsageError("put_batch: duplicate keys in batch");
        }
      }
      return mbt_put_batch(store, root, sorted, stats);
    }
    case StructureKind::Pos:
      return pos_put_batch(store, root, entries, stats);
    case StructureKind::Mvmb:
      return mvmb_put_batch(store, root, entries, stats);
    case StructureKind::Mpt: {
      std::vector<Entry> sorted(entries.begin(), entries.end());
      std::sort(sorted.begin(), sorted.end(), entry_key_less);
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (bytes_equal(sorted[i].key, sorted[i + 1].key)) {
          throw UsageError("put_batch: duplicate keys in batch");
        }
      }
      RootHandle cur = root;
      for (const Entry& e : sorted) cur = mpt_insert(store, cur, e.key, e.value, stats);
      return cur;
    }
  }
  throw UsageError("put_batch: unknown structure kind");
}

namespace {

const Bytes& fetch(const NodeStore& store, const NodeId& id, std::uint64_t* visited) {
  const Bytes* b = store.find(id);
  if (!b) throw CorruptionError("diff: dangling node id " + id.hex());
  if (visited) ++*visited;
  return *b;
}

void require_compatible(const RootHandle& a, const RootHandle& b) {
  if (a.kind != b.kind) throw UsageError("diff/merge: structure kind mismatch");
  if (!(a.meta == b.meta)) throw UsageError("diff/merge: structure parameters mismatch");
}

// In-order cursor over one tree. The next element is either an entry or a
// still-unopened subtree; identical pending subtrees in two cursors can be
// skipped wholesale, which is what prunes shared state out of a diff.
class EntryCursor {
 public:
  EntryCursor(const NodeStore& store, const RootHandle& root, std::uint64_t* visited)
      : store_(store), kind_(root.kind), visited_(visited) {
    if (!root.empty()) open(*root.root, {});
    normalize();
  }

  bool at_end() const { return stack_.empty(); }

  bool at_subtree() const {
    return !stack_.empty() && stack_.back().own_idx >= stack_.back().own.size();
  }

  const NodeId& subtree_id() const { return stack_.back().children[stack_.back().child_idx].first; }

  void skip_subtree() {
    ++stack_.back().child_idx;
    normalize();
  }

  void open_subtree() {
    Frame& top = stack_.back();
    const NodeId id = top.children[top.child_idx].first;
    Nibbles prefix = std::move(top.children[top.child_idx].second);
    ++top.child_idx;
    open(id, std::move(prefix));
    normalize();
  }

  const Entry& entry() const { return stack_.back().own[stack_.back().own_idx]; }

  void advance_entry() {
    ++stack_.back().own_idx;
    normalize();
  }

 private:
  struct Frame {
    std::vector<Entry> own;
    std::vector<std::pair<NodeId, Nibbles>> children;
    std::size_t own_idx = 0;
    std::size_t child_idx = 0;
  };

  void open(const NodeId& id, Nibbles prefix) {
    Frame f;
    const Bytes& bytes = fetch(store_, id, visited_);
    switch (kind_) {
      case StructureKind::Mpt: {
        const MptNode node = mpt_decode(bytes);
        if (const auto* l = std::get_if<MptLeaf>(&node)) {
          Nibbles full = prefix;
          full.insert(full.end(), l->path.begin(), l->path.end());
          f.own.push_back(Entry{nibbles_to_key(full), l->value});
        } else if (const auto* e = std::get_if<MptExtension>(&node)) {
          Nibbles full = prefix;
          full.insert(full.end(), e->path.begin(), e->path.end());
          f.children.emplace_back(e->child, std::move(full));
        } else {
          const auto& b = std::get<MptBranch>(node);
          if (b.value) f.own.push_back(Entry{nibbles_to_key(prefix), *b.value});
          for (std::uint8_t slot = 0; slot < 16; ++slot) {
            if (b.children[slot]) {
              Nibbles full = prefix;
              full.push_back(slot);
              f.children.emplace_back(*b.children[slot], std::move(full));
            }
          }
        }
        break;
      }
      case StructureKind::Pos: {
        PosNode node = pos_decode(bytes);
        if (auto* l = std::get_if<PosLeaf>(&node)) {
          f.own = std::move(l->entries);
        } else {
          for (const PosItem& it : std::get<PosInternal>(node).items) {
            f.children.emplace_back(it.child, Nibbles{});
          }
        }
        break;
      }
      case StructureKind::Mvmb: {
        MvmbNode node = mvmb_decode(bytes);
        if (auto* l = std::get_if<MvmbLeaf>(&node)) {
          f.own = std::move(l->entries);
        } else {
          for (const NodeId& c : std::get<MvmbInternal>(node).children) {
            f.children.emplace_back(c, Nibbles{});
          }
        }
        break;
      }
      case StructureKind::Mbt:
        throw UsageError("EntryCursor: MBT uses positional traversal");
    }
    stack_.push_back(std::move(f));
  }

  void normalize() {
    while (!stack_.empty()) {
      Frame& top = stack_.back();
      if (top.own_idx < top.own.size() || top.child_idx < top.children.size()) return;
      stack_.pop_back();
    }
  }

  const NodeStore& store_;
  StructureKind kind_;
  std::uint64_t* visited_;
  std::vector<Frame> stack_;
};

void diff_sorted_trees(const NodeStore& store, const RootHandle& a, const RootHandle& b,
                       DiffResult& out, std::uint64_t* visited) {
  EntryCursor ca(store, a, visited);
  EntryCursor cb(store, b, visited);
  for (;;) {
    if (ca.at_end() && cb.at_end()) return;
    const bool sa = !ca.at_end() && ca.at_subtree();
    const bool sb = !cb.at_end() && cb.at_subtree();
    if (sa && sb && ca.subtree_id() == cb.subtree_id()) {
      ca.skip_subtree();
      cb.skip_subtree();
      continue;
    }
    if (sa) {
      ca.open_subtree();
      continue;
    }
    if (sb) {
      cb.open_subtree();
      continue;
    }
    if (ca.at_end()) {
      out.only_in_b.push_back(cb.entry());
      cb.advance_entry();
      continue;
    }
    if (cb.at_end()) {
      out.only_in_a.push_back(ca.entry());
      ca.advance_entry();
      continue;
    }
    const int cmp = bytes_compare(ca.entry().key, cb.entry().key);
    if (cmp < 0) {
      out.only_in_a.push_back(ca.entry());
      ca.advance_entry();
    } else if (cmp > 0) {
      out.only_in_b.push_back(cb.entry());
      cb.advance_entry();
    } else {
      if (!bytes_equal(ca.entry().value, cb.entry().value)) {
        out.modified.emplace_back(ca.entry().key, ca.entry().value, cb.entry().value);
      }
      ca.advance_entry();
      cb.advance_entry();
    }
  }
}

void diff_mbt_rec(const NodeStore& store, const NodeId& ia, const NodeId& ib, DiffResult& out,
                  std::uint64_t* visited) {
  if (ia == ib) return;
  const MbtNode na = mbt_decode(fetch(store, ia, visited));
  const MbtNode nb = mbt_decode(fetch(store, ib, visited));
  if (const auto* ba = std::get_if<MbtBucket>(&na)) {
    const auto* bb = std::get_if<MbtBucket>(&nb);
    if (!bb) throw CorruptionError("diff: MBT shape mismatch");
    std::size_t i = 0, j = 0;
    while (i < ba->entries.size() || j < bb->entries.size()) {
      if (i == ba->entries.size()) {
        out.only_in_b.push_back(bb->entries[j++]);
      } else if (j == bb->entries.size()) {
        out.only_in_a.push_back(ba->entries[i++]);
      } else {
        const int cmp = bytes_compare(ba->entries[i].key, bb->entries[j].key);
        if (cmp < 0) {
          out.only_in_a.push_back(ba->entries[i++]);
        } else if (cmp > 0) {
          out.only_in_b.push_back(bb->entries[j++]);
        } else {
          if (!bytes_equal(ba->entries[i].value, bb->entries[j].value)) {
            out.modified.emplace_back(ba->entries[i].key, ba->entries[i].value,
                                      bb->entries[j].value);
          }
          ++i;
          ++j;
        }
      }
    }
    return;
  }
  const auto& ina = std::get<MbtInternal>(na);
  const auto* inb = std::get_if<MbtInternal>(&nb);
  if (!inb || ina.children.size() != inb->children.size()) {
    throw CorruptionError("diff: MBT shape mismatch");
  }
  for (std::size_t i = 0; i < ina.children.size(); ++i) {
    diff_mbt_rec(store, ina.children[i], inb->children[i], out, visited);
  }
}

}  // namespace

DiffResult index_diff(const NodeStore& store, const RootHandle& a, const RootHandle& b,
                      ReadStats* stats) {
  require_compatible(a, b);
  DiffResult out;
  std::uint64_t* visited = stats ? &stats->nodes_visited : nullptr;
  if (a.root == b.root) {
    if (visited && a.root) *visited += 1;
    return out;
  }
  if (a.kind == StructureKind::Mbt) {
    if (a.empty() || b.empty()) {
      // One side never materialized: every record of the other side differs.
      const RootHandle& full = a.empty() ? b : a;
      auto& dst = a.empty() ? out.only_in_b : out.only_in_a;
      dst = index_collect_entries(store, full);
    } else {
      diff_mbt_rec(store, *a.root, *b.root, out, visited);
    }
    auto by_key = [](const Entry& x, const Entry& y) { return bytes_less(x.key, y.key); };
    std::sort(out.only_in_a.begin(), out.only_in_a.end(), by_key);
    std::sort(out.only_in_b.begin(), out.only_in_b.end(), by_key);
    std::sort(out.modified.begin(), out.modified.end(), [](const auto& x, const auto& y) {
      return bytes_less(std::get<0>(x), std::get<0>(y));
    });
    return out;
  }
  diff_sorted_trees(store, a, b, out, visited);
  return out;
}

MergeOutcome index_merge(NodeStore& store, const RootHandle& a, const RootHandle& b,
                         MergeStrategy strategy, WriteStats* stats) {
  require_compatible(a, b);
  ReadStats rs;
  const DiffResult d = index_diff(store, a, b, &rs);
  if (stats) stats->nodes_visited += rs.nodes_visited;
  MergeOutcome outcome;
  if (strategy == MergeStrategy::Abort && !d.modified.empty()) {
    outcome.conflicts = d.modified;
    return outcome;
  }
  std::vector<Entry> changes;
  changes.reserve(d.only_in_b.size() + d.modified.size());
  for (const Entry& e : d.only_in_b) changes.push_back(e);
  if (strategy == MergeStrategy::TakeB) {
    for (const auto& [key, va, vb] : d.modified) changes.push_back(Entry{key, vb});
  }
  outcome.merged_root = index_put_batch(store, a, changes, stats);
  return outcome;
}

Proof index_prove(const NodeStore& store, const RootHandle& root, BytesView key) {
  switch (root.kind) {
    case StructureKind::Mpt:
      return mpt_prove(store, root, key);
    case StructureKind::Mbt:
      return mbt_prove(store, root, key);
    case StructureKind::Pos:
      return pos_prove(store, root, key);
    case StructureKind::Mvmb:
      return mvmb_prove(store, root, key);
  }
  throw UsageError("prove: unknown structure kind");
}

bool index_verify(const NodeId& digest, BytesView key, BytesView expected_value,
                  const Proof& proof) {
  switch (proof.kind) {
    case StructureKind::Mpt:
      return mpt_verify(digest, key, expected_value, proof);
    case StructureKind::Mbt:
      return mbt_verify(digest, key, expected_value, proof);
    case StructureKind::Pos:
      return pos_verify(digest, key, expected_value, proof);
    case StructureKind::Mvmb:
      return mvmb_verify(digest, key, expected_value, proof);
  }
  return false;
}

std::vector<Entry> index_collect_entries(const NodeStore& store, const RootHandle& root) {
  std::vector<Entry> out;
  if (root.empty()) return out;
  if (root.kind == StructureKind::Mbt) {
    // Buckets are hash-ordered; collect then sort.
    std::vector<NodeId> pending{*root.root};
    while (!pending.empty()) {
      const NodeId id = pending.back();
      pending.pop_back();
      const MbtNode node = mbt_decode(fetch(store, id, nullptr));
      if (const auto* b = std::get_if<MbtBucket>(&node)) {
        out.insert(out.end(), b->entries.begin(), b->entries.end());
      } else {
        const auto& in = std::get<MbtInternal>(node);
        pending.insert(pending.end(), in.children.begin(), in.children.end());
      }
    }
    std::sort(out.begin(), out.end(), entry_key_less);
    return out;
  }
  EntryCursor cur(store, root, nullptr);
  while (!cur.at_end()) {
    if (cur.at_subtree()) {
      cur.open_subtree();
      continue;
    }
    out.push_back(cur.entry());
    cur.advance_entry();
  }
  return out;
}

std::vector<NodeId> node_children(StructureKind kind, BytesView node_bytes) {
  std::vector<NodeId> out;
  switch (kind) {
    case StructureKind::Mpt: {
      const MptNode node = mpt_decode(node_bytes);
      if (const auto* b = std::get_if<MptBranch>(&node)) {
        for (const auto& c : b->children) {
          if (c) out.push_back(*c);
        }
      } else if (const auto* e = std::get_if<MptExtension>(&node)) {
        out.push_back(e->child);
      }
      return out;
    }
    case StructureKind::Mbt: {
      const MbtNode node = mbt_decode(node_bytes);
      if (const auto* in = std::get_if<MbtInternal>(&node)) out = in->children;
      return out;
    }
    case StructureKind::Pos: {
      const PosNode node = pos_decode(node_bytes);
      if (const auto* in = std::get_if<PosInternal>(&node)) {
        for (const PosItem& it : in->items) out.push_back(it.child);
      }
      return out;
    }
    case StructureKind::Mvmb: {
      const MvmbNode node = mvmb_decode(node_bytes);
      if (const auto* in = std::get_if<MvmbInternal>(&node)) out = in->children;
      return out;
    }
  }
  throw UsageError("node_children: unknown structure kind");
}

}  // namespace siri
