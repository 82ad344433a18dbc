#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>

namespace fairrec {

// splitmix64 step; used to derive well-separated substream seeds.
inline std::uint64_t mix_seed(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream * 0x9e3779b97f4a7c15ULL + 1));
}

// Deterministic generator. Distributions are implemented explicitly rather
// than via std:: distribution objects so that a (seed, stream) pair yields
// the same draws on every standard-conforming toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_stream_seed(seed, stream));
  }

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0, 1), 53-bit resolution
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  long uniform_int(long lo, long hi) {  // inclusive bounds
    assert(hi >= lo);
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(engine_() % span);
  }

  // Box-Muller without caching the second deviate: draw order is a pure
  // function of the call sequence.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Inverse-CDF draw from an (approximately) normalized probability vector.
  // The final index absorbs rounding slack.
  int categorical(const Eigen::VectorXd& p) {
    const double u = uniform();
    double acc = 0.0;
    const int n = static_cast<int>(p.size());
    for (int i = 0; i < n; ++i) {
      acc += p[i];
      if (u < acc) return i;
    }
    for (int i = n - 1; i >= 0; --i) {
      if (p[i] > 0.0) return i;
    }
    return n - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairrec
