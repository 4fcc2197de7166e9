#pragma once

#include <cmath>
#include <cstdint>

namespace tudiff::rng {

// Counter-based random numbers. Every draw is a pure function of
// (seed, stream, counter), so any slice of a stream can be generated
// independently and partitioned work reproduces the serial result
// bit for bit.
//
// Construction: the SplitMix64 finalizer applied to an affine counter
// walk (Weyl sequence with the golden-ratio increment). Uniforms take
// the top 53 bits into (0,1), open at both ends so Box-Muller never
// sees log(0). Normals are Box-Muller over two consecutive counters.

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

/// Collapses (seed, stream) into the per-stream key all draws hang off.
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(seed ^ mix64(stream * kGolden + 0x6A09E667F3BCC909ULL));
}

constexpr std::uint64_t bits_at(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGolden);
}

/// Uniform draw in the open interval (0,1) at a fixed counter.
inline double uniform01_at(std::uint64_t key, std::uint64_t counter) {
  return (static_cast<double>(bits_at(key, counter) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw at pair index j; consumes counters 2j and 2j+1.
inline double normal_at(std::uint64_t key, std::uint64_t pair_index) {
  const double u1 = uniform01_at(key, 2 * pair_index);
  const double u2 = uniform01_at(key, 2 * pair_index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

/// Unbiased-to-2^-64 integer in [0, n) from raw bits.
constexpr std::uint64_t bounded(std::uint64_t bits, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(bits) * static_cast<unsigned __int128>(n)) >> 64);
}

// Sequential view over one (seed, stream). Draw order is part of the
// on-disk/reproducibility contract wherever a Sequence is consumed.
class Sequence {
 public:
  Sequence(std::uint64_t seed, std::uint64_t stream) : key_(stream_key(seed, stream)) {}

  std::uint64_t next_u64() { return bits_at(key_, counter_++); }
  double uniform01() { return uniform01_at(key_, counter_++); }

  double normal() {
    const double u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return bounded(next_u64(), n); }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace tudiff::rng
