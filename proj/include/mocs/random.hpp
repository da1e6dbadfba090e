// random.hpp - seeded random streams shared by the samplers and the harness.
#pragma once

#include <cstdint>
#include <random>

namespace mocs {

/// SplitMix64 finalizer; derives independent stream seeds and drives Rng.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based SplitMix64 engine (a UniformRandomBitGenerator). Seeding is
/// a single store, which matters because the selector opens one stream per
/// element and most elements live for a handful of draws.
class Rng {
 public:
  using result_type = std::uint64_t;
  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() {
    const std::uint64_t out = splitmix64(state_);
    state_ += 0x9e3779b97f4a7c15ULL;
    return out;
  }
  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::uint64_t state_;
};

/// Seed for the stream identified by (seed, index). Streams for distinct
/// indices are statistically independent; the mapping is platform independent.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  return Rng(stream_seed(seed, index));
}

/// Uniform double in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

}  // namespace mocs
