#pragma once

#include <cmath>
#include <cstdint>

#include "polydev/common.hpp"

namespace polydev {

/// Counter-based pseudo-random generator (Philox-4x32-10).
///
/// The generator is a pure function of (key, counter), so independent streams
/// are cheap: every logical draw sequence gets its own stream id and the
/// stream can be replayed from its (master seed, stream id) pair alone.
/// Worker threads never share generator state, which is what makes runs
/// byte-identical regardless of --workers.
class Rng {
 public:
  Rng(std::uint64_t master_seed, std::uint64_t stream_id)
      : key0_(static_cast<std::uint32_t>(master_seed)),
        key1_(static_cast<std::uint32_t>(master_seed >> 32)),
        ctr2_(static_cast<std::uint32_t>(stream_id)),
        ctr3_(static_cast<std::uint32_t>(stream_id >> 32)) {}

  std::uint64_t next_u64() {
    if (have_ >= 4) refill();
    std::uint64_t lo = block_[have_++];
    std::uint64_t hi = block_[have_++];
    return (hi << 32) | lo;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform01_open_low() { return 1.0 - uniform01(); }

  /// Standard normal, Box-Muller with one cached variate.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01_open_low();
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * kPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /// Integer in [0, bound) by rejection on the top bits (unbiased).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw contract_violation("Rng::below: bound must be positive");
    std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  double exponential() { return -std::log(uniform01_open_low()); }

 private:
  void refill() {
    std::uint32_t c0 = ctr0_, c1 = ctr1_, c2 = ctr2_, c3 = ctr3_;
    std::uint32_t k0 = key0_, k1 = key1_;
    for (int round = 0; round < 10; ++round) {
      std::uint64_t p0 = 0xD2511F53ull * c0;
      std::uint64_t p1 = 0xCD9E8D57ull * c2;
      std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
      std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
      std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
      std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
      c0 = hi1 ^ c1 ^ k0;
      c1 = lo1;
      c2 = hi0 ^ c3 ^ k1;
      c3 = lo0;
      k0 += 0x9E3779B9u;
      k1 += 0xBB67AE85u;
    }
    block_[0] = c0;
    block_[1] = c1;
    block_[2] = c2;
    block_[3] = c3;
    have_ = 0;
    if (++ctr0_ == 0) ++ctr1_;  // 64-bit block counter within the stream
  }

  std::uint32_t key0_, key1_;
  std::uint32_t ctr0_ = 0, ctr1_ = 0;  // per-block counter
  std::uint32_t ctr2_, ctr3_;          // stream id
  std::uint32_t block_[4] = {0, 0, 0, 0};
  int have_ = 4;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive stream ids from labels such as
/// (purpose tag, point count, trial index) without collisions in practice.
inline std::uint64_t mix_u64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream(std::uint64_t tag, std::uint64_t a = 0,
                                   std::uint64_t b = 0) {
  return mix_u64(mix_u64(mix_u64(tag) ^ a) ^ b);
}

}  // namespace polydev
