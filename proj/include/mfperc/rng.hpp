#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>

namespace mfperc {

/// Engine used for every stochastic operation. Streams are created from
/// seeds produced by derive_seed so results never depend on scheduling.
using Rng = std::mt19937_64;

/// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream seed for (master, labels...): the master is mixed, then each label
/// is XOR-ed in and the state re-mixed, so label order matters.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::span<const std::uint64_t> labels) noexcept {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t label : labels) s = splitmix64(s ^ splitmix64(label));
  return s;
}

constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> labels) noexcept {
  return derive_seed(master, std::span<const std::uint64_t>(labels.begin(), labels.size()));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Uniform integer in [0, bound).
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

/// Number of failures before the next success of a Bernoulli(p) sequence.
/// Saturates at max() for p == 0.
inline std::uint64_t geometric_skip(Rng& rng, double p) {
  if (p >= 1.0) return 0;
  if (p <= 0.0) return std::numeric_limits<std::uint64_t>::max();
  const double u = 1.0 - uniform01(rng);  // (0, 1]
  const double k = std::floor(std::log(u) / std::log1p(-p));
  if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(k);
}

}  // namespace mfperc
