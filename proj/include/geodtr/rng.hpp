#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace geodtr {

/// Deterministic 64-bit generator (splitmix64 core). All randomized
/// operations in the project draw from this generator so results are
/// bit-reproducible across platforms and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_int(std::uint64_t n) {
    // multiply-shift; bias is negligible for the small n used here
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Standard normal via Box-Muller; draws two uniforms per call.
  double normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

 private:
  std::uint64_t state_;
};

/// Mixes a base seed with a path of stream identifiers. Derived streams
/// (per item, per epoch, per view, ...) are independent of the draw order
/// in sibling streams.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = seed;
  for (std::uint64_t id : path) {
    s ^= id + 0x9e3779b97f4a7c15ULL + (s << 6) + (s >> 2);
    Rng mix(s);
    s = mix.next_u64();
  }
  return s;
}

}  // namespace geodtr
