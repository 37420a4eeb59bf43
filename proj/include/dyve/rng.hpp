#pragma once

#include <cstdint>
#include <string_view>

namespace dyve::rng {

// SplitMix64. Used both as a stream generator and as a mixing function for
// seed derivation, so that every sample in the pipeline draws from a seed
// that is a pure function of (run seed, stable identity) rather than of
// scheduling order.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1). 53-bit mantissa, identical on every platform.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform in [0, bound). Rejection-free threshold method.
  uint64_t next_below(uint64_t bound) {
    // Lemire multiply-shift; bias below 2^-64 per draw, fine for test-scale use
    // and fully deterministic across platforms.
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    return static_cast<uint64_t>(m >> 64);
  }

  // Uniform integer in [lo, hi] inclusive.
  int64_t next_in(int64_t lo, int64_t hi) {
    return lo + static_cast<int64_t>(next_below(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool next_bernoulli(double p) { return next_double() < p; }

 private:
  uint64_t state_;
};

inline uint64_t mix(uint64_t a, uint64_t b) {
  SplitMix64 g(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return g.next();
}

// Derived seed for a named sub-stream: hash(run_seed, salt).
inline uint64_t derive_seed(uint64_t base, uint64_t salt) { return mix(base, salt); }

// FNV-1a over bytes; used to give strings (ids, prefixes) a stable identity
// for seed derivation.
inline uint64_t fnv1a(std::string_view bytes, uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dyve::rng
