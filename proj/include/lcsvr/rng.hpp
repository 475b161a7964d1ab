#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lcsvr {

/// Seeded generator with hand-rolled transforms so that every stream is a
/// pure function of the seed, independent of the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller.
  double gaussian() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * M_PI * u2);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  /// Laplace(0, b) via the inverse CDF.
  double laplacian(double scale_b) {
    const double u = uniform() - 0.5;
    const double s = u < 0.0 ? -1.0 : 1.0;
    return -scale_b * s * std::log1p(-2.0 * std::abs(u));
  }

  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace lcsvr
