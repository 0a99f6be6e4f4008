// SPDX-License-Identifier: Apache-2.0
#include "siri/mpt.hpp"

#include <cassert>

#include "siri/codec.hpp"
#include "siri/errors.hpp"

namespace siri {

Nibbles key_to_nibbles(BytesView key) {
  Nibbles out;
  out.reserve(key.size() * 2);
  for (std::uint8_t b : key) {
    out.push_back(b >> 4);
    out.push_back(b & 0xf);
  }
  return out;
}

Bytes nibbles_to_key(const Nibbles& nibbles) {
  if (nibbles.size() % 2 != 0) throw CorruptionError("mpt: odd nibble count for a key");
  Bytes out;
  out.reserve(nibbles.size() / 2);
  for (std::size_t i = 0; i < nibbles.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>((nibbles[i] << 4) | nibbles[i + 1]));
  }
  return out;
}

Bytes hp_encode(const Nibbles& nibbles, bool is_leaf) {
  Nibbles seq;
  seq.reserve(nibbles.size() + 2);
  const std::uint8_t flag = static_cast<std::uint8_t>(2 * (is_leaf ? 1 : 0) + (nibbles.size() % 2));
  seq.push_back(flag);
  if (nibbles.size() % 2 == 0) seq.push_back(0);
  seq.insert(seq.end(), nibbles.begin(), nibbles.end());
  Bytes out;
  out.reserve(seq.size() / 2);
  for (std::size_t i = 0; i < seq.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>((seq[i] << 4) | seq[i + 1]));
  }
  return out;
}

std::pair<Nibbles, bool> hp_decode(BytesView encoded) {
  if (encoded.empty()) throw CorruptionError("hp_decode: empty input");
  const std::uint8_t flag = encoded[0] >> 4;
  if (flag > 3) throw CorruptionError("hp_decode: bad header nibble");
  const bool is_leaf = (flag & 2) != 0;
  const bool odd = (flag & 1) != 0;
  if (!odd && (encoded[0] & 0xf) != 0) throw CorruptionError("hp_decode: nonzero pad nibble");
  Nibbles out;
  out.reserve(encoded.size() * 2);
  if (odd) out.push_back(encoded[0] & 0xf);
  for (std::size_t i = 1; i < encoded.size(); ++i) {
    out.push_back(encoded[i] >> 4);
    out.push_back(encoded[i] & 0xf);
  }
  return {std::move(out), is_leaf};
}

namespace {

constexpr std::uint8_t kTagBranch = 0;
constexpr std::uint8_t kTagLeaf = 1;
constexpr std::uint8_t kTagExtension = 2;

const Bytes& fetch(const NodeStore& store, const NodeId& id, std::uint64_t* visited) {
  const Bytes* b = store.find(id);
  if (!b) throw CorruptionError("mpt: dangling node id " + id.hex());
  if (visited) ++*visited;
  return *b;
}

std::size_t common_prefix(const Nibbles& a, std::size_t a_from, const Nibbles& b,
                          std::size_t b_from) {
  std::size_t n = 0;
  while (a_from + n < a.size() && b_from + n < b.size() && a[a_from + n] == b[b_from + n]) ++n;
  return n;
}

Nibbles tail(const Nibbles& n, std::size_t from) {
  return Nibbles(n.begin() + static_cast<std::ptrdiff_t>(from), n.end());
}

}  // namespace

Bytes mpt_encode(const MptNode& node) {
  Bytes out;
  if (const auto* b = std::get_if<MptBranch>(&node)) {
    append_u8(out, kTagBranch);
    std::uint16_t bitmap = 0;
    for (int i = 0; i < 16; ++i) {
      if (b->children[i]) bitmap |= static_cast<std::uint16_t>(1u << i);
    }
    append_u16le(out, bitmap);
    append_u8(out, b->value ? 1 : 0);
    if (b->value) {
      append_u32le(out, static_cast<std::uint32_t>(b->value->size()));
      append_bytes(out, *b->value);
    }
    for (int i = 0; i < 16; ++i) {
      if (b->children[i]) {
        append_u8(out, static_cast<std::uint8_t>(i));
        append_node_id(out, *b->children[i]);
      }
    }
  } else if (const auto* l = std::get_if<MptLeaf>(&node)) {
    append_u8(out, kTagLeaf);
    const Bytes hp = hp_encode(l->path, true);
    append_u32le(out, static_cast<std::uint32_t>(hp.size()));
    append_bytes(out, hp);
    append_u32le(out, static_cast<std::uint32_t>(l->value.size()));
    append_bytes(out, l->value);
  } else {
    const auto& e = std::get<MptExtension>(node);
    append_u8(out, kTagExtension);
    const Bytes hp = hp_encode(e.path, false);
    append_u32le(out, static_cast<std::uint32_t>(hp.size()));
    append_bytes(out, hp);
    append_node_id(out, e.child);
  }
  return out;
}

MptNode mpt_decode(BytesView bytes) {
  ByteReader r(bytes);
  const std::uint8_t tag = r.u8();
  switch (tag) {
    case kTagBranch: {
      MptBranch b;
      const std::uint16_t bitmap = r.u16le();
      if (r.u8() != 0) {
        const std::uint32_t vlen = r.u32le();
        b.value = r.bytes(vlen);
      }
      for (int i = 0; i < 16; ++i) {
        if (bitmap & (1u << i)) {
          const std::uint8_t slot = r.u8();
          if (slot != i) throw CorruptionError("mpt branch: slot order mismatch");
          b.children[i] = r.node_id();
        }
      }
      return b;
    }
    case kTagLeaf: {
      MptLeaf l;
      const std::uint32_t plen = r.u32le();
      auto [nibs, is_leaf] = hp_decode(r.bytes(plen));
      if (!is_leaf) throw CorruptionError("mpt leaf: extension path flag");
      l.path = std::move(nibs);
      const std::uint32_t vlen = r.u32le();
      Bytes v = r.bytes(vlen);
      l.value = std::move(v);
      return l;
    }
    case kTagExtension: {
      MptExtension e;
      const std::uint32_t plen = r.u32le();
      auto [nibs, is_leaf] = hp_decode(r.bytes(plen));
      if (is_leaf) throw CorruptionError("mpt extension: leaf path flag");
      if (nibs.empty()) throw CorruptionError("mpt extension: empty path");
      e.path = std::move(nibs);
      e.child = r.node_id();
      return e;
    }
    default:
      throw CorruptionError("mpt: unknown node tag");
  }
}

std::optional<Bytes> mpt_lookup(const NodeStore& store, const RootHandle& root, BytesView key,
                                ReadStats* stats) {
  if (root.empty()) return std::nullopt;
  const Nibbles nibs = key_to_nibbles(key);
  std::uint64_t visited = 0;
  std::optional<Bytes> result;
  NodeId cur = *root.root;
  std::size_t pos = 0;
  for (;;) {
    const MptNode node = mpt_decode(fetch(store, cur, &visited));
    if (const auto* l = std::get_if<MptLeaf>(&node)) {
      if (nibs.size() - pos == l->path.size() &&
          std::equal(l->path.begin(), l->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
        result = l->value;
      }
      break;
    }
    if (const auto* e = std::get_if<MptExtension>(&node)) {
      if (nibs.size() - pos < e->path.size() ||
          !std::equal(e->path.begin(), e->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
        break;
      }
      pos += e->path.size();
      cur = e->child;
      continue;
    }
    const auto& b = std::get<MptBranch>(node);
    if (pos == nibs.size()) {
      if (b.value) result = *b.value;
      break;
    }
    const std::uint8_t slot = nibs[pos];
    if (!b.children[slot]) break;
    cur = *b.children[slot];
    ++pos;
  }
  if (stats) stats->nodes_visited += visited;
  return result;
}

namespace {

struct MptWriter {
  NodeStore& store;
  WriteStats* stats;

  NodeId put(const MptNode& node) {
    bool added = false;
    const NodeId id = store.put(mpt_encode(node), &added);
    if (stats && added) ++stats->nodes_created;
    return id;
  }
  const Bytes& read(const NodeId& id) {
    return fetch(store, id, stats ? &stats->nodes_visited : nullptr);
  }
};

NodeId insert_rec(MptWriter& w, const std::optional<NodeId>& node_id, const Nibbles& nibs,
                  std::size_t pos, BytesView value) {
  if (!node_id) {
    return w.put(MptLeaf{tail(nibs, pos), Bytes(value.begin(), value.end())});
  }
  MptNode node = mpt_decode(w.read(*node_id));

  if (auto* l = std::get_if<MptLeaf>(&node)) {
    const std::size_t common = common_prefix(l->path, 0, nibs, pos);
    if (common == l->path.size() && pos + common == nibs.size()) {
      return w.put(MptLeaf{l->path, Bytes(value.begin(), value.end())});
    }
    MptBranch branch;
    if (common == l->path.size()) {
      branch.value = l->value;
    } else {
      branch.children[l->path[common]] = w.put(MptLeaf{tail(l->path, common + 1), l->value});
    }
    if (pos + common == nibs.size()) {
      branch.value = Bytes(value.begin(), value.end());
    } else {
      branch.children[nibs[pos + common]] =
          w.put(MptLeaf{tail(nibs, pos + common + 1), Bytes(value.begin(), value.end())});
    }
    const NodeId bid = w.put(branch);
    if (common == 0) return bid;
    return w.put(MptExtension{Nibbles(l->path.begin(), l->path.begin() + static_cast<std::ptrdiff_t>(common)), bid});
  }

  if (auto* e = std::get_if<MptExtension>(&node)) {
    const std::size_t common = common_prefix(e->path, 0, nibs, pos);
    if (common == e->path.size()) {
      const NodeId child = insert_rec(w, e->child, nibs, pos + common, value);
      return w.put(MptExtension{e->path, child});
    }
    // Diverges inside the extension: a branch at the split point takes over.
    MptBranch branch;
    const Nibbles etail = tail(e->path, common + 1);
    branch.children[e->path[common]] = etail.empty() ? e->child : w.put(MptExtension{etail, e->child});
    if (pos + common == nibs.size()) {
      branch.value = Bytes(value.begin(), value.end());
    } else {
      branch.children[nibs[pos + common]] =
          w.put(MptLeaf{tail(nibs, pos + common + 1), Bytes(value.begin(), value.end())});
    }
    const NodeId bid = w.put(branch);
    if (common == 0) return bid;
    return w.put(MptExtension{Nibbles(e->path.begin(), e->path.begin() + static_cast<std::ptrdiff_t>(common)), bid});
  }

  auto& b = std::get<MptBranch>(node);
  if (pos == nibs.size()) {
    b.value = Bytes(value.begin(), value.end());
    return w.put(b);
  }
  const std::uint8_t slot = nibs[pos];
  b.children[slot] = insert_rec(w, b.children[slot], nibs, pos + 1, value);
  return w.put(b);
}

}  // namespace

RootHandle mpt_insert(NodeStore& store, const RootHandle& root, BytesView key, BytesView value,
                      WriteStats* stats) {
  if (key.empty() || key.size() > 1024) throw UsageError("mpt_insert: key length out of range");
  MptWriter w{store, stats};
  const Nibbles nibs = key_to_nibbles(key);
  RootHandle out = root;
  out.root = insert_rec(w, root.root, nibs, 0, value);
  return out;
}

namespace {

struct RemoveRes {
  bool changed = false;
  bool empty = false;
  std::optional<MptNode> node;  // set when changed && !empty; not yet stored
};

// Stores `node` unless it is already in the store under old_id semantics;
// helper for embedding a child reference.
NodeId store_node(MptWriter& w, const MptNode& node) { return w.put(node); }

RemoveRes remove_rec(MptWriter& w, const NodeId& node_id, const Nibbles& nibs, std::size_t pos) {
  MptNode node = mpt_decode(w.read(node_id));

  if (auto* l = std::get_if<MptLeaf>(&node)) {
    if (nibs.size() - pos == l->path.size() &&
        std::equal(l->path.begin(), l->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
      return {true, true, std::nullopt};
    }
    return {};
  }

  if (auto* e = std::get_if<MptExtension>(&node)) {
    if (nibs.size() - pos < e->path.size() ||
        !std::equal(e->path.begin(), e->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
      return {};
    }
    RemoveRes r = remove_rec(w, e->child, nibs, pos + e->path.size());
    if (!r.changed) return {};
    if (r.empty) throw CorruptionError("mpt remove: extension child vanished");
    // Re-compact so no extension points at another extension or a leaf.
    if (std::holds_alternative<MptBranch>(*r.node)) {
      return {true, false, MptExtension{e->path, store_node(w, *r.node)}};
    }
    if (auto* cl = std::get_if<MptLeaf>(&*r.node)) {
      Nibbles merged = e->path;
      merged.insert(merged.end(), cl->path.begin(), cl->path.end());
      return {true, false, MptLeaf{std::move(merged), std::move(cl->value)}};
    }
    auto& ce = std::get<MptExtension>(*r.node);
    Nibbles merged = e->path;
    merged.insert(merged.end(), ce.path.begin(), ce.path.end());
    return {true, false, MptExtension{std::move(merged), ce.child}};
  }

  auto& b = std::get<MptBranch>(node);
  if (pos == nibs.size()) {
    if (!b.value) return {};
    b.value.reset();
  } else {
    const std::uint8_t slot = nibs[pos];
    if (!b.children[slot]) return {};
    RemoveRes r = remove_rec(w, *b.children[slot], nibs, pos + 1);
    if (!r.changed) return {};
    if (r.empty) {
      b.children[slot].reset();
    } else {
      // Child survives; check whether the branch itself survives before
      // deciding how to embed it.
      int occupied = 0;
      for (const auto& c : b.children) occupied += c.has_value() ? 1 : 0;
      if (occupied >= 2 || b.value) {
        b.children[slot] = store_node(w, *r.node);
        return {true, false, std::move(node)};
      }
      // Branch collapses into this child: prepend the slot nibble.
      if (auto* cl = std::get_if<MptLeaf>(&*r.node)) {
        Nibbles merged{slot};
        merged.insert(merged.end(), cl->path.begin(), cl->path.end());
        return {true, false, MptLeaf{std::move(merged), std::move(cl->value)}};
      }
      if (auto* ce = std::get_if<MptExtension>(&*r.node)) {
        Nibbles merged{slot};
        merged.insert(merged.end(), ce->path.begin(), ce->path.end());
        return {true, false, MptExtension{std::move(merged), ce->child}};
      }
      return {true, false, MptExtension{Nibbles{slot}, store_node(w, *r.node)}};
    }
  }

  // A slot or the value was dropped: restore canonical branch form.
  int occupied = 0;
  int last_slot = -1;
  for (int i = 0; i < 16; ++i) {
    if (b.children[i]) {
      ++occupied;
      last_slot = i;
    }
  }
  if (occupied >= 2 || (occupied >= 1 && b.value)) return {true, false, std::move(node)};
  if (occupied == 0 && b.value) return {true, false, MptLeaf{{}, *b.value}};
  if (occupied == 0) return {true, true, std::nullopt};

  // Exactly one child and no value: collapse into it.
  const std::uint8_t slot = static_cast<std::uint8_t>(last_slot);
  MptNode child = mpt_decode(w.read(*b.children[slot]));
  if (auto* cl = std::get_if<MptLeaf>(&child)) {
    Nibbles merged{slot};
    merged.insert(merged.end(), cl->path.begin(), cl->path.end());
    return {true, false, MptLeaf{std::move(merged), std::move(cl->value)}};
  }
  if (auto* ce = std::get_if<MptExtension>(&child)) {
    Nibbles merged{slot};
    merged.insert(merged.end(), ce->path.begin(), ce->path.end());
    return {true, false, MptExtension{std::move(merged), ce->child}};
  }
  return {true, false, MptExtension{Nibbles{slot}, *b.children[slot]}};
}

}  // namespace

RootHandle mpt_remove(NodeStore& store, const RootHandle& root, BytesView key, WriteStats* stats) {
  if (root.empty()) return root;
  MptWriter w{store, stats};
  const Nibbles nibs = key_to_nibbles(key);
  RemoveRes r = remove_rec(w, *root.root, nibs, 0);
  RootHandle out = root;
  if (!r.changed) return out;
  if (r.empty) {
    out.root.reset();
  } else {
    out.root = w.put(*r.node);
  }
  return out;
}

Proof mpt_prove(const NodeStore& store, const RootHandle& root, BytesView key) {
  Proof proof;
  proof.kind = StructureKind::Mpt;
  proof.meta = root.meta;
  if (root.empty()) throw UsageError("mpt_prove: key absent (empty index)");
  const Nibbles nibs = key_to_nibbles(key);
  NodeId cur = *root.root;
  std::size_t pos = 0;
  for (;;) {
    const Bytes& bytes = fetch(store, cur, nullptr);
    proof.path_nodes.push_back(bytes);
    const MptNode node = mpt_decode(bytes);
    if (const auto* l = std::get_if<MptLeaf>(&node)) {
      if (nibs.size() - pos == l->path.size() &&
          std::equal(l->path.begin(), l->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
        return proof;
      }
      throw UsageError("mpt_prove: key absent");
    }
    if (const auto* e = std::get_if<MptExtension>(&node)) {
      if (nibs.size() - pos < e->path.size() ||
          !std::equal(e->path.begin(), e->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
        throw UsageError("mpt_prove: key absent");
      }
      pos += e->path.size();
      cur = e->child;
      continue;
    }
    const auto& b = std::get<MptBranch>(node);
    if (pos == nibs.size()) {
      if (b.value) return proof;
      throw UsageError("mpt_prove: key absent");
    }
    const std::uint8_t slot = nibs[pos];
    if (!b.children[slot]) throw UsageError("mpt_prove: key absent");
    cur = *b.children[slot];
    ++pos;
  }
}

bool mpt_verify(const NodeId& digest, BytesView key, BytesView expected_value, const Proof& proof) {
  if (proof.path_nodes.empty()) return false;
  const Nibbles nibs = key_to_nibbles(key);
  NodeId expect = digest;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < proof.path_nodes.size(); ++i) {
    const Bytes& bytes = proof.path_nodes[i];
    if (sha256(bytes) != expect) return false;
    MptNode node;
    try {
      node = mpt_decode(bytes);
    } catch (const CorruptionError&) {
      return false;
    }
    const bool last = i + 1 == proof.path_nodes.size();
    if (const auto* l = std::get_if<MptLeaf>(&node)) {
      return last && nibs.size() - pos == l->path.size() &&
             std::equal(l->path.begin(), l->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos)) &&
             bytes_equal(l->value, expected_value);
    }
    if (const auto* e = std::get_if<MptExtension>(&node)) {
      if (last) return false;
      if (nibs.size() - pos < e->path.size() ||
          !std::equal(e->path.begin(), e->path.end(), nibs.begin() + static_cast<std::ptrdiff_t>(pos))) {
        return false;
      }
      pos += e->path.size();
      expect = e->child;
      continue;
    }
    const auto& b = std::get<MptBranch>(node);
    if (pos == nibs.size()) {
      return last && b.value && bytes_equal(*b.value, expected_value);
    }
    if (last) return false;
    const std::uint8_t slot = nibs[pos];
    if (!b.children[slot]) return false;
    expect = *b.children[slot];
    ++pos;
  }
  return false;
}

namespace {

void check_canonical_rec(const NodeStore& store, const NodeId& id, bool parent_is_extension) {
  const MptNode node = mpt_decode(fetch(store, id, nullptr));
  if (const auto* b = std::get_if<MptBranch>(&node)) {
    int occupied = 0;
    for (const auto& c : b->children) occupied += c.has_value() ? 1 : 0;
    if (!(occupied >= 2 || (occupied >= 1 && b->value))) {
      throw CorruptionError("mpt canonical: under-occupied branch");
    }
    for (const auto& c : b->children) {
      if (c) check_canonical_rec(store, *c, false);
    }
    return;
  }
  if (const auto* e = std::get_if<MptExtension>(&node)) {
    if (parent_is_extension) throw CorruptionError("mpt canonical: extension chain");
    if (e->path.empty()) throw CorruptionError("mpt canonical: empty extension path");
    const MptNode child = mpt_decode(fetch(store, e->child, nullptr));
    if (!std::holds_alternative<MptBranch>(child)) {
      throw CorruptionError("mpt canonical: extension child is not a branch");
    }
    check_canonical_rec(store, e->child, true);
    return;
  }
}

}  // namespace

void mpt_check_canonical(const NodeStore& store, const RootHandle& root) {
  if (root.empty()) return;
  check_canonical_rec(store, *root.root, false);
}

}  // namespace siri
