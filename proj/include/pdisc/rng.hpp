#pragma once

// Deterministic, splittable randomness.
//
// We use a counter construction on top of the SplitMix64 finalizer: a stream
// key is derived once from (seed, stream tag), and the i-th output is
// mix64(key + i*golden). Two properties matter here:
//   * reproducibility is positional — output i never depends on how many
//     values other consumers drew, so instance generation, the walk
//     directions, and the rounding coins can't perturb one another;
//   * descending into a sub-stream (per-restart, per-round) is just another
//     key derivation, no jump-ahead bookkeeping.

#include <cstdint>
#include <vector>

namespace pdisc {

inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Top-level stream tags. Instance data, LP objective direction, walk
// randomness and rounding coins are all decoupled by construction.
inline constexpr std::uint64_t kStreamInstance = 1;
inline constexpr std::uint64_t kStreamDirection = 2;
inline constexpr std::uint64_t kStreamWalk = 3;
inline constexpr std::uint64_t kStreamRounding = 4;
inline constexpr std::uint64_t kStreamMonteCarlo = 5;

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream))), ctr_(0) {}

  // Child generator; tag is typically a retry or round index.
  Rng descend(std::uint64_t tag) const { return Rng(key_, mix64(tag) | 1); }

  std::uint64_t u64() {
    return mix64(key_ + (++ctr_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform on the open interval (0,1): 53-bit mantissa centered in its bin,
  // so neither endpoint is attainable and log(u) is always finite.
  double uniform() { return (double(u64() >> 11) + 0.5) * 0x1.0p-53; }

  // Standard normal via Box-Muller; second member of the pair is cached.
  double normal();

  void fill_normal(double* out, std::size_t n);
  std::vector<double> normal_vector(std::size_t n) {
    std::vector<double> v(n);
    fill_normal(v.data(), n);
    return v;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pdisc
