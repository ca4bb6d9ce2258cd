#pragma once

#include <cstdint>

namespace fluidq {

// Splittable counter-seeded generator: each (seed, stream) pair yields an
// independent xoshiro256++ state expanded through splitmix64, so sample
// streams are reproducible regardless of thread scheduling.

inline std::uint64_t splitmix64_next(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Xoshiro256 {
 public:
  Xoshiro256(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    s0_ = splitmix64_next(s);
    s1_ = splitmix64_next(s);
    s2_ = splitmix64_next(s);
    s3_ = splitmix64_next(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s0_ + s3_, 23) + s0_;
    const std::uint64_t t = s1_ << 17;
    s2_ ^= s0_;
    s3_ ^= s1_;
    s1_ ^= s2_;
    s0_ ^= s3_;
    s2_ ^= t;
    s3_ = rotl(s3_, 45);
    return result;
  }

  /// Uniform on (0, 1); never returns 0 or 1.
  double next_double() {
    double u;
    do {
      u = (next_u64() >> 11) * 0x1.0p-53;
    } while (u == 0.0);
    return u;
  }

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type(0); }
  result_type operator()() { return next_u64(); }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
  std::uint64_t s0_, s1_, s2_, s3_;
};

}  // namespace fluidq
