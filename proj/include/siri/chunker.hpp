// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "siri/bytes.hpp"
#include "siri/node_id.hpp"

namespace siri {

// Content-defined chunking configuration. A boundary is declared where the
// Rabin fingerprint of the sliding window has its low pattern_bits equal to
// pattern_value, subject to the min/max chunk limits. The forced split at
// max_chunk_bytes exists for pathological inputs and for the
// structural-invariance ablation; force_split_at_half moves that forced cut
// back to max_chunk_bytes/2 past the previous boundary, which is the
// ablation's history-dependence lever.
struct ChunkConfig {
  std::size_t window_bytes = 67;
  std::uint32_t pattern_bits = 10;
  std::uint64_t pattern_value = 0;
  std::size_t max_chunk_bytes = 16 * 1024;
  std::size_t min_chunk_bytes = 256;
  bool force_split_at_half = false;

  std::size_t expected_chunk_bytes() const { return std::size_t{1} << pattern_bits; }
};

// Rolling Rabin fingerprint: the window bytes are treated as a polynomial
// over GF(2) and reduced modulo a fixed irreducible polynomial of degree 63
// (the LBFS default 0xbfe6b8a5bf378d83). Feeding w bytes from scratch and
// rolling across a stream agree exactly, so a per-window recomputation is a
// valid oracle for the rolling form.
class RabinRoller {
 public:
  explicit RabinRoller(std::size_t window_bytes);

  // Shift the window forward by one byte. Bytes older than the window width
  // must be retired by the caller via the `out` parameter of roll().
  void feed(std::uint8_t in) { fp_ = append(fp_, in); }
  void roll(std::uint8_t in, std::uint8_t out) { fp_ = append(fp_ ^ out_table_[out], in); }
  void reset() { fp_ = 0; }

  std::uint64_t fingerprint() const { return fp_; }

  std::size_t window_bytes() const { return window_; }

  static bool fingerprint_matches(std::uint64_t fp, const ChunkConfig& cfg) {
    const std::uint64_t mask =
        cfg.pattern_bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << cfg.pattern_bits) - 1);
    return (fp & mask) == (cfg.pattern_value & mask);
  }

 private:
  static std::uint64_t append(std::uint64_t fp, std::uint8_t b);

  std::size_t window_;
  std::uint64_t fp_ = 0;
  std::array<std::uint64_t, 256> out_table_{};
};

// All split offsets for data under cfg, strictly ascending, ending with
// data.size() (empty input yields no offsets). Windows slide continuously
// over the input; min/max gating is relative to the previous emitted
// boundary. Output depends only on (data, cfg).
std::vector<std::size_t> boundaries(BytesView data, const ChunkConfig& cfg);

// Pattern test on a node id: true iff the low pattern_bits of the digest,
// read from its last bytes upward, equal pattern_value. Used by the POS-Tree
// internal layers in place of a rolling window.
bool hash_matches(const NodeId& id, const ChunkConfig& cfg);
bool hash_matches(const NodeId& id, std::uint32_t pattern_bits, std::uint64_t pattern_value);

}  // namespace siri
