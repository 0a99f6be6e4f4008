// SPDX-License-Identifier: Apache-2.0
#include "siri/store.hpp"

#include <fstream>
#include <mutex>

#include "siri/errors.hpp"

namespace siri {

namespace {
constexpr char kMagic[4] = {'S', 'I', 'R', 'I'};
constexpr std::uint8_t kVersion = 0x01;
}  // namespace

NodeId NodeStore::put(BytesView node_bytes, bool* newly_added) {
  if (node_bytes.empty()) throw UsageError("NodeStore::put: empty node");
  const NodeId id = sha256(node_bytes);
  std::unique_lock lock(mutex_);
  auto [it, inserted] = nodes_.try_emplace(id, node_bytes.begin(), node_bytes.end());
  if (inserted) total_bytes_ += node_bytes.size();
  if (newly_added) *newly_added = inserted;
  return id;
}

const Bytes* NodeStore::find(const NodeId& id) const {
  std::shared_lock lock(mutex_);
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

std::optional<Bytes> NodeStore::get(const NodeId& id) const {
  const Bytes* b = find(id);
  if (!b) return std::nullopt;
  return *b;
}

StoreStats NodeStore::stats() const {
  std::shared_lock lock(mutex_);
  return StoreStats{nodes_.size(), total_bytes_};
}

void NodeStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("store save: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  out.put(static_cast<char>(kVersion));
  std::shared_lock lock(mutex_);
  for (const auto& [id, bytes] : nodes_) {
    Bytes hdr;
    append_u32le(hdr, static_cast<std::uint32_t>(bytes.size()));
    out.write(reinterpret_cast<const char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  if (!out) throw FormatError("store save: write failed for " + path.string());
}

NodeStore NodeStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("store load: cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("store load: bad magic in " + path.string());
  }
  const int version = in.get();
  if (version != kVersion) throw FormatError("store load: unsupported version");

  NodeStore store;
  for (;;) {
    std::uint8_t len_bytes[4];
    if (!in.read(reinterpret_cast<char*>(len_bytes), 4)) {
      if (in.gcount() == 0 && in.eof()) break;
      throw FormatError("store load: truncated record header");
    }
    std::uint32_t len = 0;
    for (int i = 3; i >= 0; --i) len = (len << 8) | len_bytes[i];
    if (len == 0) throw FormatError("store load: zero-length record");
    Bytes payload(len);
    if (!in.read(reinterpret_cast<char*>(payload.data()), len)) {
      throw FormatError("store load: truncated record payload");
    }
    const NodeId id = sha256(payload);
    auto it = store.nodes_.find(id);
    if (it != store.nodes_.end()) {
      // Same digest must mean same bytes; anything else is a corrupt file.
      if (it->second != payload) throw FormatError("store load: digest mismatch");
      continue;
    }
    store.total_bytes_ += payload.size();
    store.nodes_.emplace(id, std::move(payload));
  }
  return store;
}

}  // namespace siri
