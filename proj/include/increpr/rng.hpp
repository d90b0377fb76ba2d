#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

// Counter-based seeded generator used everywhere randomness is needed.
// The stream is a splitmix64 walk with Gaussian variates produced by
// Box-Muller, so identical seeds give bit-identical samples on every
// platform and build; benchmark reproducibility depends on this.

namespace increpr::rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_);
  }

  // uniform in (0, 1], 53-bit resolution; never zero so log() is safe
  double uniform01() {
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
  }

  // standard normal via Box-Muller; second variate of each pair is cached
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // circularly symmetric complex normal: N(0,1/2) + i N(0,1/2)
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * 0.7071067811865475244, im * 0.7071067811865475244};
  }

  // uniform integer in [lo, hi], inclusive, rejection-sampled
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t range = hi - lo + 1;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return lo + v % range;
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Independent per-task seed from a master seed and up to two indices,
// e.g. (master, grid index, trial index). Pure hash, no shared state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  std::uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0xc2b2ae3d27d4eb4fULL));
  return h;
}

}  // namespace increpr::rng
