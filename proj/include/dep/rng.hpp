#pragma once

#include <cmath>
#include <cstdint>

namespace dep {

inline std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-style splitmix64 generator. Draws are a pure function of the seed
// and the chain of stream labels, so sample i of epoch e sees the same values
// no matter which order samples are processed in.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix64_mix(seed ^ 0x9e3779b97f4a7c15ULL)) {}

  // Derive an independent substream keyed by `label`.
  Rng stream(std::uint64_t label) const {
    Rng r(0);
    r.state_ = splitmix64_mix(state_ ^ splitmix64_mix(label * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64_mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). Modulo bias is irrelevant at n << 2^64.
  std::uint64_t uniform_int(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Standard normal via Box-Muller; always consumes exactly two draws.
  double normal() {
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t state_;
};

}  // namespace dep
