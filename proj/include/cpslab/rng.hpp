#pragma once

// Deterministic simulation randomness.
//
// Reports must be byte-identical across reruns with the same seed, so every
// stochastic routine in the library draws through this header instead of the
// distribution adaptors in <random> (their output sequences are
// implementation-defined).  Only fully specified primitives are used:
// std::mt19937_64 for the raw stream, an explicit 53-bit mantissa scaling for
// uniforms, and a hand-rolled Box-Muller transform for normals.
//
// Scenario streams are decorrelated by hashing (seed, stream) through
// splitmix64 before seeding the engine, so scenario i can be regenerated in
// isolation without replaying scenarios 0..i-1.

#include <cmath>
#include <cstdint>
#include <random>

namespace cpslab {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Collapses (seed, stream) into a single well-mixed 64-bit engine seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed;
  std::uint64_t a = splitmix64_next(s);
  s ^= stream * 0xda942042e4dd58b5ull;
  std::uint64_t b = splitmix64_next(s);
  return a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
}

class SimRng {
 public:
  explicit SimRng(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(mix_seed(seed, stream)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]: usable directly inside logarithms.
  double uniform01_open_left() { return 1.0 - uniform01(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer on [lo, hi] via rejection-free modulo of a 64-bit draw;
  // the bias is < 2^-50 for the small ranges used here.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01_open_left();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace cpslab
