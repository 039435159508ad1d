#include "lpdist/rng.hpp"

#include <cmath>

namespace lpdist {
namespace {

constexpr uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;

inline void mulhilo(uint64_t a, uint64_t b, uint64_t& hi, uint64_t& lo) {
  __uint128_t prod = static_cast<__uint128_t>(a) * b;
  hi = static_cast<uint64_t>(prod >> 64);
  lo = static_cast<uint64_t>(prod);
}

}  // namespace

RandomStream::RandomStream(uint64_t seed, uint64_t substream_id)
    : seed_(seed), substream_(substream_id) {}

void RandomStream::refill() {
  uint64_t c0 = substream_;  // high counter word = substream id
  uint64_t c1 = block_++;
  uint64_t key = seed_;
  for (int round = 0; round < 10; ++round) {
    uint64_t hi, lo;
    mulhilo(kPhiloxM, c0, hi, lo);
    c0 = hi ^ key ^ c1;
    c1 = lo;
    key += kPhiloxW;
  }
  buf_[0] = c0;
  buf_[1] = c1;
  buf_pos_ = 0;
}

uint64_t RandomStream::next_u64() {
  if (buf_pos_ >= 2) refill();
  return buf_[buf_pos_++];
}

double RandomStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::next_gaussian() {
  for (;;) {
    const double u = 2.0 * next_unit() - 1.0;
    const double v = 2.0 * next_unit() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    return u * std::sqrt(-2.0 * std::log(s) / s);
  }
}

double RandomStream::next_exponential() {
  return -std::log1p(-next_unit());
}

double RandomStream::next_sign() {
  return (next_u64() >> 63) ? 1.0 : -1.0;
}

uint64_t RandomStream::next_below(uint64_t n) {
  const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

}  // namespace lpdist
