// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "siri/index.hpp"
#include "siri/index_types.hpp"
#include "siri/store.hpp"

namespace siri {

// Deep-copies the whole tree, re-serializing every node with the salt
// appended so all node ids change. Nothing is shared with the input version
// afterwards.
RootHandle resalt_tree(NodeStore& store, const RootHandle& root, std::uint64_t salt,
                       WriteStats* stats = nullptr);

// Breakdown lever: an index whose writes forcibly copy every node, so
// consecutive versions share nothing. Deduplication and node sharing ratios
// over its versions come out as exactly zero.
class NoRecursiveIdentityIndex {
 public:
  NoRecursiveIdentityIndex(NodeStore& store, RootHandle root)
      : store_(store), root_(std::move(root)) {}

  const RootHandle& root() const { return root_; }

  RootHandle insert(BytesView key, BytesView value, WriteStats* stats = nullptr) {
    root_ = index_insert(store_, root_, key, value, stats);
    root_ = resalt_tree(store_, root_, ++version_, stats);
    return root_;
  }

  RootHandle remove(BytesView key, WriteStats* stats = nullptr) {
    root_ = index_remove(store_, root_, key, stats);
    root_ = resalt_tree(store_, root_, ++version_, stats);
    return root_;
  }

  RootHandle put_batch(std::span<const Entry> entries, WriteStats* stats = nullptr) {
    root_ = index_put_batch(store_, root_, entries, stats);
    root_ = resalt_tree(store_, root_, ++version_, stats);
    return root_;
  }

 private:
  NodeStore& store_;
  RootHandle root_;
  std::uint64_t version_ = 0;
};

}  // namespace siri
