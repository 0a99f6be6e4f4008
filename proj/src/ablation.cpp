// SPDX-License-Identifier: Apache-2.0
#include "siri/ablation.hpp"

#include <unordered_map>

#include "siri/codec.hpp"
#include "siri/errors.hpp"
#include "siri/mbt.hpp"
#include "siri/mpt.hpp"
#include "siri/mvmb_tree.hpp"
#include "siri/pos_tree.hpp"

namespace siri {

namespace {

// Re-encodes a node with its child references substituted.
Bytes rewrite_children(StructureKind kind, BytesView bytes,
                       const std::unordered_map<NodeId, NodeId, NodeIdHash>& map) {
  auto mapped = [&](const NodeId& id) {
    auto it = map.find(id);
    if (it == map.end()) throw CorruptionError("resalt: unmapped child");
    return it->second;
  };
  switch (kind) {
    case StructureKind::Mpt: {
      MptNode node = mpt_decode(bytes);
      if (auto* b = std::get_if<MptBranch>(&node)) {
        for (auto& c : b->children) {
          if (c) c = mapped(*c);
        }
      } else if (auto* e = std::get_if<MptExtension>(&node)) {
        e->child = mapped(e->child);
      }
      return mpt_encode(node);
    }
    case StructureKind::Mbt: {
      MbtNode node = mbt_decode(bytes);
      if (auto* in = std::get_if<MbtInternal>(&node)) {
        for (NodeId& c : in->children) c = mapped(c);
      }
      return mbt_encode(node);
    }
    case StructureKind::Pos: {
      PosNode node = pos_decode(bytes);
      if (auto* in = std::get_if<PosInternal>(&node)) {
        for (PosItem& it : in->items) it.child = mapped(it.child);
      }
      return pos_encode(node);
    }
    case StructureKind::Mvmb: {
      MvmbNode node = mvmb_decode(bytes);
      if (auto* in = std::get_if<MvmbInternal>(&node)) {
        for (NodeId& c : in->children) c = mapped(c);
      }
      return mvmb_encode(node);
    }
  }
  throw UsageError("resalt: unknown structure kind");
}

NodeId resalt_rec(NodeStore& store, StructureKind kind, const NodeId& id, std::uint64_t salt,
                  std::unordered_map<NodeId, NodeId, NodeIdHash>& map, WriteStats* stats) {
  auto hit = map.find(id);
  if (hit != map.end()) return hit->second;
  const Bytes* bytes = store.find(id);
  if (!bytes) throw CorruptionError("resalt: dangling node id " + id.hex());
  if (stats) ++stats->nodes_visited;
  for (const NodeId& child : node_children(kind, *bytes)) {
    resalt_rec(store, kind, child, salt, map, stats);
  }
  Bytes salted = rewrite_children(kind, *bytes, map);
  append_u64le(salted, salt);
  bool added = false;
  const NodeId fresh = store.put(salted, &added);
  if (stats && added) ++stats->nodes_created;
  map.emplace(id, fresh);
  return fresh;
}

}  // namespace

RootHandle resalt_tree(NodeStore& store, const RootHandle& root, std::uint64_t salt,
                       WriteStats* stats) {
  if (root.empty()) return root;
  std::unordered_map<NodeId, NodeId, NodeIdHash> map;
  RootHandle out = root;
  out.root = resalt_rec(store, root.kind, *root.root, salt, map, stats);
  return out;
}

}  // namespace siri
