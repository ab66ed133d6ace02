#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "netfuse/mathutil.hpp"

// Self-contained random variate generation. Every sampler below consumes a
// private xoshiro256++ stream, so results depend only on the stream seed and
// never on platform library internals. Streams for parallel work are derived
// from (seed, stream id, substream id) hashes; see Rng::derive.

namespace netfuse {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl64(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) {
    std::uint64_t x = seed;
    for (auto& w : state_) w = detail::splitmix64(x);
  }

  // Independent stream for unit `stream` (e.g. a dyad index) and `substream`
  // (e.g. an iteration). Same inputs give the same stream on every platform
  // and under any worker count.
  static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t substream = 0) {
    std::uint64_t x = seed;
    std::uint64_t h = detail::splitmix64(x);
    x = h ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    h = detail::splitmix64(x);
    x = h ^ (0xC2B2AE3D27D4EB4FULL * (substream + 1));
    return Rng(detail::splitmix64(x));
  }

  std::uint64_t next_u64() {
    auto& s = state_;
    const std::uint64_t result = detail::rotl64(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = detail::rotl64(s[3], 45);
    return result;
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1].
  double uniform_pos() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double exponential(double rate = 1.0) { return -std::log(uniform_pos()) / rate; }

  // Double exponential (Laplace) with location 0 and the given scale;
  // density exp(-|x|/scale) / (2*scale).
  double laplace(double scale) {
    const double u = uniform() - 0.5;
    const double mag = -std::log1p(-2.0 * std::fabs(u));
    return u < 0.0 ? -scale * mag : scale * mag;
  }

  // Gamma(shape, rate) via Marsaglia-Tsang, with the usual boost for shape < 1.
  double gamma(double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) {
      throw std::invalid_argument("Rng::gamma: shape and rate must be positive");
    }
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0, 1.0);
      return g * std::pow(uniform_pos(), 1.0 / shape) / rate;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
  }

  // Inverse Gaussian with mean mu and shape lambda (Michael-Schucany-Haas).
  double inverse_gaussian(double mu, double lambda) {
    if (!(mu > 0.0) || !(lambda > 0.0)) {
      throw std::invalid_argument("Rng::inverse_gaussian: parameters must be positive");
    }
    const double nu = normal();
    const double y = nu * nu;
    const double mu_y = mu * y;
    double x = mu + 0.5 * mu * mu_y / lambda
             - 0.5 * mu / lambda * std::sqrt(4.0 * mu_y * lambda + mu_y * mu_y);
    if (!(x > 0.0)) x = std::numeric_limits<double>::min();
    if (uniform() <= mu / (mu + x)) return x;
    return mu * mu / x;
  }

  // Standard normal truncated to [lo, hi]; either bound may be infinite.
  double truncated_std_normal(double lo, double hi) {
    const double inf = std::numeric_limits<double>::infinity();
    if (!(lo < hi)) throw std::invalid_argument("truncated_std_normal: requires lo < hi");
    if (lo == -inf && hi == inf) return normal();
    if (hi == inf) return lower_tail_normal(lo);
    if (lo == -inf) return -lower_tail_normal(-hi);
    if (lo + hi > 0.0) return -two_sided_normal(-hi, -lo);
    return two_sided_normal(lo, hi);
  }

  // N(mean, sd) truncated to [lo, hi].
  double truncated_normal(double mean, double sd, double lo, double hi) {
    const double inf = std::numeric_limits<double>::infinity();
    const double a = lo == -inf ? -inf : (lo - mean) / sd;
    const double b = hi == inf ? inf : (hi - mean) / sd;
    return mean + sd * truncated_std_normal(a, b);
  }

 private:
  // Standard normal conditioned on being >= a.
  double lower_tail_normal(double a) {
    if (a < 0.3) {
      for (;;) {
        const double x = normal();
        if (x >= a) return x;
      }
    }
    // Robert (1995) translated-exponential rejection.
    const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      const double x = a + exponential(alpha);
      const double d = x - alpha;
      if (uniform() <= std::exp(-0.5 * d * d)) return x;
    }
  }

  // Two-sided truncation with lo + hi <= 0 (interval not entirely in the
  // upper tail); finite bounds.
  double two_sided_normal(double lo, double hi) {
    const double mass = norm_cdf(hi) - norm_cdf(lo);
    if (mass > 0.30) {
      for (;;) {
        const double x = normal();
        if (x >= lo && x <= hi) return x;
      }
    }
    if (hi <= 0.0) {
      // Entire interval in the lower tail: try the tail sampler from -hi,
      // rejecting draws beyond -lo, unless the conditional acceptance is poor.
      const double a = -hi;
      const double tail_a = norm_cdf(-a);
      const double tail_b = norm_cdf(lo);  // = upper tail mass beyond -lo
      if (tail_a > 0.0 && 1.0 - tail_b / tail_a >= 0.15) {
        for (;;) {
          const double x = lower_tail_normal(a);
          if (x <= -lo) return -x;
        }
      }
      // Narrow far-tail interval: uniform proposal with envelope at hi.
      for (;;) {
        const double x = lo + (hi - lo) * uniform();
        if (std::log(uniform_pos()) <= 0.5 * (hi * hi - x * x)) return x;
      }
    }
    // Interval straddles zero but carries little mass (wide bounds handled
    // above); uniform proposal with envelope at the mode.
    for (;;) {
      const double x = lo + (hi - lo) * uniform();
      if (std::log(uniform_pos()) <= -0.5 * x * x) return x;
    }
  }

  std::uint64_t state_[4];
};

}  // namespace netfuse
