#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace lpf {

// splitmix64 finalizer; good avalanche, cheap.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Combine a seed with an arbitrary list of tags into one stream key.
// Streams derived from distinct tag tuples are treated as independent.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
  return h;
}

// Tags naming the independent randomness consumers of a run. Values are
// part of the reproducibility contract: changing them changes all results.
enum class Stream : std::uint64_t {
  burn_in = 1,
  propagation = 2,
  signal = 3,
  observation = 4,
  select_signal = 5,
  resample = 6,
  jitter = 7,
  mcmc_noise = 8,
  mcmc_accept = 9,
};

inline std::uint64_t tag(Stream s) { return static_cast<std::uint64_t>(s); }

// A seeded random stream with pinned uniform/normal generation so results
// do not depend on the standard library's distribution implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : eng_(seed) {}
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags)
      : eng_(derive_seed(seed, tags)) {}

  // Uniform on [0,1): top 53 bits of the engine output.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // Uniform on [0,1], endpoint-inclusive enough for coefficient draws.
  double uniform_closed() { return uniform(); }

  // One Box-Muller value per call (cosine branch only; no cached spare).
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny compared to 2^64.
    return eng_() % n;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lpf
