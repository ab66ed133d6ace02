#pragma once

#include <cmath>
#include <stdexcept>

#include "netfuse/mathutil.hpp"
#include "netfuse/rng.hpp"

// Exact sampler for the Polya-Gamma distribution PG(1, z), following the
// alternating-series rejection scheme of Devroye (2009) as arranged by
// Polson, Scott and Windle (2013). The draw equals J*(1, |z|/2) / 4, where
// J* is sampled from a two-piece proposal (inverse-Gaussian body, exponential
// tail) and accepted against the partial sums of the Jacobi series. Expected
// number of proposals is close to 1 uniformly in z; no truncation error.

namespace netfuse {

namespace pg_detail {

inline constexpr double kTrunc = 0.64;

// n-th Jacobi series coefficient a_n(x), using the left (x <= t) or right
// (x > t) expansion.
inline double series_coef(int n, double x) {
  const double k = (n + 0.5) * kPi;
  if (x > kTrunc) {
    return k * std::exp(-0.5 * k * k * x);
  }
  if (x > 0.0) {
    const double np = n + 0.5;
    return std::exp(-1.5 * (std::log(0.5 * kPi) + std::log(x)) + std::log(k) - 2.0 * np * np / x);
  }
  return 0.0;
}

// Probability that the two-piece proposal draws from the exponential tail
// piece on (t, inf) rather than the inverse-Gaussian piece on (0, t).
inline double tail_mass_ratio(double z) {
  const double t = kTrunc;
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double b = (t * z - 1.0) / std::sqrt(t);
  const double a = -(t * z + 1.0) / std::sqrt(t);
  const double x0 = std::log(fz) + fz * t;
  const double xb = x0 - z + norm_logcdf(b);
  const double xa = x0 + z + norm_logcdf(a);
  const double q_over_p = 4.0 / kPi * (std::exp(xb) + std::exp(xa));
  return 1.0 / (1.0 + q_over_p);
}

// Inverse Gaussian with mean 1/z and shape 1, truncated to (0, t).
inline double trunc_inverse_gaussian(double z, Rng& rng) {
  const double t = kTrunc;
  double x = t + 1.0;
  if (z < 1.0 / t) {
    // Small tilt: rejection from the untilted level-crossing proposal.
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      x = 1.0 + e1 * t;
      x = t / (x * x);
      if (rng.uniform() <= std::exp(-0.5 * z * z * x)) return x;
    }
  }
  // Larger tilt: plain inverse-Gaussian draws until one lands in (0, t).
  const double mu = 1.0 / z;
  while (x > t) {
    const double nu = rng.normal();
    const double y = nu * nu;
    const double mu_y = mu * y;
    x = mu + 0.5 * mu * mu_y - 0.5 * mu * std::sqrt(4.0 * mu_y + mu_y * mu_y);
    if (!(x > 0.0)) x = 1e-300;
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
  }
  return x;
}

}  // namespace pg_detail

// One exact draw from PG(1, z). E[PG(1, z)] = tanh(z/2) / (2 z).
inline double sample_pg1(double z, Rng& rng) {
  if (!std::isfinite(z)) throw std::invalid_argument("sample_pg1: z must be finite");
  z = 0.5 * std::fabs(z);
  const double fz = 0.125 * kPi * kPi + 0.5 * z * z;
  const double p_tail = pg_detail::tail_mass_ratio(z);
  for (;;) {
    double x;
    if (rng.uniform() < p_tail) {
      x = pg_detail::kTrunc + rng.exponential() / fz;
    } else {
      x = pg_detail::trunc_inverse_gaussian(z, rng);
    }
    double s = pg_detail::series_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    for (;;) {
      ++n;
      if (n % 2 == 1) {
        s -= pg_detail::series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += pg_detail::series_coef(n, x);
        if (y > s) break;  // reject, propose again
      }
    }
  }
}

}  // namespace netfuse
