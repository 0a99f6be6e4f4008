// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "siri/index_types.hpp"

namespace siri {

// splitmix64; used to seed the main generator and derive substream seeds.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// xoshiro256** seeded via splitmix64.
class Xoshiro256ss {
 public:
  explicit Xoshiro256ss(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& s : s_) s = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Unbiased uniform in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    for (;;) {
      const std::uint64_t v = next();
      if (v < limit) return v % n;
    }
  }

  double double01() { return double(next() >> 11) * 0x1.0p-53; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::uint64_t s_[4];
};

// YCSB-style Zipfian rank sampler with zeta precomputation; theta = 0 is
// plain uniform.
class ZipfianSampler {
 public:
  ZipfianSampler(std::uint64_t n, double theta);

  std::uint64_t next(Xoshiro256ss& rng) const;

 private:
  std::uint64_t n_;
  double theta_;
  double zetan_ = 0;
  double alpha_ = 0;
  double eta_ = 0;
};

struct WorkloadSpec {
  std::uint64_t n_records = 10000;
  std::size_t key_len_min = 5;
  std::size_t key_len_max = 15;
  std::size_t value_len_mean = 256;
  double zipf_theta = 0.0;
  double write_ratio = 0.0;
  std::size_t batch_size = 2000;
  double overlap_ratio = 0.0;
  std::size_t groups = 10;
  std::uint64_t seed = 42;
};

struct WorkloadOp {
  bool is_write = false;
  Bytes key;
  Bytes value;  // empty for reads
};

// Unique printable keys with lengths uniform in [key_len_min, key_len_max];
// value lengths uniform in [mean/2, 3*mean/2]. Fully reproducible per seed.
std::vector<Entry> gen_dataset(const WorkloadSpec& spec);

// count operations with Zipfian key choice over dataset ranks and the given
// write fraction; callers group them into batch_size batches.
std::vector<WorkloadOp> gen_ops(const WorkloadSpec& spec, std::span<const Entry> dataset,
                                std::size_t count);

// Per-group record sequences sharing exactly floor(overlap * n_records)
// identical entries, disjoint otherwise; each group's order is an
// independent shuffle.
std::vector<std::vector<Entry>> gen_group_workloads(const WorkloadSpec& spec);

enum class VersionScenario { Update, Insert };

// Per-version edit batches; each batch covers a contiguous key range (in
// sort order) of size floor(alpha * |R|). Updates keep the record count;
// inserts grow it by the same amount.
std::vector<std::vector<Entry>> gen_alpha_versions(std::span<const Entry> dataset, double alpha,
                                                   std::size_t n_versions,
                                                   VersionScenario scenario, std::uint64_t seed,
                                                   std::size_t value_len_mean = 256);

// Line-delimited external records: "key<TAB>base64(value)" per line.
std::vector<Entry> load_records(const std::filesystem::path& path);

}  // namespace siri
