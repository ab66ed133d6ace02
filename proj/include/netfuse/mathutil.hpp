#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>

namespace netfuse {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

inline double logistic(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) {
  return std::log(p) - std::log1p(-p);
}

// log(1 + exp(x)) without overflow at either end.
inline double log1pexp(double x) {
  if (x > 37.0) return x + std::exp(-x);
  if (x > -37.0) return std::log1p(std::exp(x));
  return std::exp(x);
}

// log(1 - exp(-x)) for x > 0.
inline double log1mexp(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x <= 0.693147180559945) return std::log(-std::expm1(-x));
  return std::log1p(-std::exp(-x));
}

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double norm_pdf(double z) {
  return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

inline double norm_cdf(double z) {
  return 0.5 * std::erfc(-z / kSqrt2);
}

// log Phi(z), stable deep into the lower tail.
inline double norm_logcdf(double z) {
  if (z > -1.0) {
    return std::log1p(-0.5 * std::erfc(z / kSqrt2));
  }
  if (z > -26.0) {
    return std::log(0.5 * std::erfc(-z / kSqrt2));
  }
  // Asymptotic expansion of the Mills ratio for the far tail.
  const double z2 = z * z;
  const double corr = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - kLogSqrt2Pi - std::log(-z) + std::log(corr);
}

// log(Phi(b) - Phi(a)) for a < b.
inline double log_norm_interval(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("log_norm_interval: requires a < b");
  if (a + b > 0.0) return log_norm_interval(-b, -a);  // work in the lower tail
  const double lb = norm_logcdf(b);
  const double la = norm_logcdf(a);
  return lb + log1mexp(lb - la);
}

}  // namespace netfuse
