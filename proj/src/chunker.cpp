// SPDX-License-Identifier: Apache-2.0
#include "siri/chunker.hpp"

#include <cassert>

namespace siri {

namespace {

// Irreducible polynomial of degree 63 over GF(2), bit 63 = x^63. This is the
// default fingerprint polynomial shipped with LBFS-derived chunkers.
constexpr std::uint64_t kPoly = 0xbfe6b8a5bf378d83ULL;
constexpr unsigned kDegree = 63;

// (value * x^shift) mod kPoly, by long division.
std::uint64_t polymod_shifted(std::uint64_t value, unsigned shift) {
  // Work bit by bit from the top; degree of value*x^shift is < 64+shift here.
  std::uint64_t rem = 0;
  for (int bit = 63; bit >= 0; --bit) {
    rem <<= 1;
    if (rem & (std::uint64_t{1} << kDegree)) rem ^= kPoly;
    if (value & (std::uint64_t{1} << bit)) rem ^= 1;
  }
  for (unsigned i = 0; i < shift; ++i) {
    rem <<= 1;
    if (rem & (std::uint64_t{1} << kDegree)) rem ^= kPoly;
  }
  return rem & ((std::uint64_t{1} << kDegree) - 1);
}

}  // namespace

std::uint64_t RabinRoller::append(std::uint64_t fp, std::uint8_t b) {
  // fp < 2^63; split off the 8 bits that overflow degree 63 after the shift.
  static const auto mod_table = [] {
    std::array<std::uint64_t, 256> t{};
    for (unsigned i = 0; i < 256; ++i) t[i] = polymod_shifted(i, kDegree);
    return t;
  }();
  const std::uint64_t hi = fp >> (kDegree - 8);
  const std::uint64_t lo = ((fp << 8) | b) & ((std::uint64_t{1} << kDegree) - 1);
  return lo ^ mod_table[hi];
}

RabinRoller::RabinRoller(std::size_t window_bytes) : window_(window_bytes) {
  assert(window_ > 0);
  // out_table_[b] = contribution of byte b once it is window-1 positions old.
  for (unsigned b = 0; b < 256; ++b) {
    std::uint64_t fp = append(0, static_cast<std::uint8_t>(b));
    for (std::size_t i = 1; i < window_; ++i) fp = append(fp, 0);
    out_table_[b] = fp;
  }
}

std::vector<std::size_t> boundaries(BytesView data, const ChunkConfig& cfg) {
  std::vector<std::size_t> out;
  if (data.empty()) return out;
  assert(cfg.min_chunk_bytes < cfg.max_chunk_bytes);

  RabinRoller roller(cfg.window_bytes);
  const std::size_t w = cfg.window_bytes;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i < w) {
      roller.feed(data[i]);
    } else {
      roller.roll(data[i], data[i - w]);
    }
    const std::size_t o = i + 1;
    const bool full_window = o >= w;
    if (full_window && RabinRoller::fingerprint_matches(roller.fingerprint(), cfg) &&
        o - prev >= cfg.min_chunk_bytes) {
      out.push_back(o);
      prev = o;
    } else if (o - prev >= cfg.max_chunk_bytes) {
      const std::size_t cut =
          cfg.force_split_at_half ? prev + std::max<std::size_t>(1, cfg.max_chunk_bytes / 2) : o;
      out.push_back(cut);
      prev = cut;
    }
  }
  if (out.empty() || out.back() != data.size()) out.push_back(data.size());
  return out;
}

bool hash_matches(const NodeId& id, std::uint32_t pattern_bits, std::uint64_t pattern_value) {
  const std::uint32_t q = pattern_bits > 256 ? 256 : pattern_bits;
  for (std::uint32_t i = 0; i < q; ++i) {
    const unsigned digest_bit = (id.digest[31 - i / 8] >> (i % 8)) & 1;
    const unsigned pattern_bit = i < 64 ? static_cast<unsigned>((pattern_value >> i) & 1) : 0;
    if (digest_bit != pattern_bit) return false;
  }
  return true;
}

bool hash_matches(const NodeId& id, const ChunkConfig& cfg) {
  return hash_matches(id, cfg.pattern_bits, cfg.pattern_value);
}

}  // namespace siri
