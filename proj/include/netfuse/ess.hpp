#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

// Effective sample size ESS = B / (1 + 2 * sum_k rho(k)) with the truncation
// lag chosen by the initial monotone positive sequence rule: autocorrelations
// are summed in adjacent pairs Gamma_m = rho(2m) + rho(2m+1), the sum stops at
// the first nonpositive pair, and the kept pairs are forced non-increasing.

namespace netfuse {

inline double ess(const std::vector<double>& chain) {
  const std::size_t B = chain.size();
  if (B < 10) throw std::invalid_argument("ess: need a chain of length >= 10");
  double mean = 0.0;
  for (double x : chain) mean += x;
  mean /= static_cast<double>(B);
  std::vector<double> c(chain.size());
  for (std::size_t t = 0; t < B; ++t) c[t] = chain[t] - mean;

  auto autocov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t t = 0; t + k < B; ++t) s += c[t] * c[t + k];
    return s / static_cast<double>(B);
  };

  const double c0 = autocov(0);
  if (!(c0 > 0.0)) return static_cast<double>(B);  // constant chain convention

  double sum_pairs = 0.0;
  double prev_pair = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < B; ++m) {
    const double rho_even = (m == 0) ? 1.0 : autocov(2 * m) / c0;
    const double rho_odd = autocov(2 * m + 1) / c0;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    if (pair > prev_pair) pair = prev_pair;
    sum_pairs += pair;
    prev_pair = pair;
  }
  // tau = 1 + 2 * sum_{k>=1} rho(k) = 2 * sum_pairs - 1 (the pair sum counts
  // rho(0) = 1 once).
  const double tau = 2.0 * sum_pairs - 1.0;
  if (!(tau > 0.0)) return static_cast<double>(B);
  const double result = static_cast<double>(B) / tau;
  return result > static_cast<double>(B) ? static_cast<double>(B) : result;
}

}  // namespace netfuse
