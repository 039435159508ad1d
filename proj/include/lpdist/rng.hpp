#pragma once

#include <cstdint>

namespace lpdist {

// Counter-based stream (Philox2x64, 10 rounds). A (seed, substream_id) pair
// fully determines the output sequence, and distinct substream ids index
// disjoint counter ranges, so per-trial substreams are independent and the
// schedule is reproducible regardless of how trials are assigned to threads.
// Single-owner: not safe to share one instance across threads.
class RandomStream {
 public:
  RandomStream(uint64_t seed, uint64_t substream_id);

  uint64_t next_u64();

  // Uniform on [0,1) with 53-bit resolution.
  double next_unit();

  // Standard normal via the polar method (second value discarded so the
  // draw count per call is state-independent of later calls).
  double next_gaussian();

  // Exponential(1) = -ln(1-U); finite for every representable U.
  double next_exponential();

  // Uniform sign, +1.0 or -1.0.
  double next_sign();

  // Unbiased uniform draw from {0, 1, ..., n-1} by rejection.
  uint64_t next_below(uint64_t n);

  uint64_t seed() const { return seed_; }
  uint64_t substream_id() const { return substream_; }

 private:
  void refill();

  uint64_t seed_;
  uint64_t substream_;
  uint64_t block_ = 0;   // low counter word, incremented per refill
  uint64_t buf_[2] = {0, 0};
  int buf_pos_ = 2;      // 2 means empty
};

}  // namespace lpdist
