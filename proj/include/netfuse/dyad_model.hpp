#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "netfuse/mathutil.hpp"
#include "netfuse/network.hpp"
#include "netfuse/rng.hpp"

// Four-category dyad model: for an unordered pair i < j at time t, the joint
// outcome (y[i->j], y[j->i]) has unnormalized weights
//   (0,0): 1   (1,0): e^t1   (0,1): e^t2   (1,1): e^{t1+t2+t3}
// so t1/t2 are directed log-odds and t3 is the reciprocity interaction.

namespace netfuse {

enum class DyadCategory : unsigned char { C00 = 0, C10 = 1, C01 = 2, C11 = 3 };

// y[i->j] component of the category (the i<j direction).
inline int y_first(DyadCategory c) {
  return c == DyadCategory::C10 || c == DyadCategory::C11 ? 1 : 0;
}

// y[j->i] component.
inline int y_second(DyadCategory c) {
  return c == DyadCategory::C01 || c == DyadCategory::C11 ? 1 : 0;
}

inline DyadCategory make_category(int y_ij, int y_ji) {
  return static_cast<DyadCategory>((y_ij ? 1 : 0) | (y_ji ? 2 : 0));
}

struct ThetaTriple {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;

  double get(int r) const {
    switch (r) {
      case 1: return theta1;
      case 2: return theta2;
      case 3: return theta3;
      default: throw std::out_of_range("ThetaTriple::get: r must be 1, 2 or 3");
    }
  }
  void set(int r, double v) {
    switch (r) {
      case 1: theta1 = v; return;
      case 2: theta2 = v; return;
      case 3: theta3 = v; return;
      default: throw std::out_of_range("ThetaTriple::set: r must be 1, 2 or 3");
    }
  }
  bool finite() const {
    return std::isfinite(theta1) && std::isfinite(theta2) && std::isfinite(theta3);
  }
};

// One coefficient's trajectory (theta_0, ..., theta_T). The anchor theta_0 is
// fixed at construction; solvers and samplers may only write t >= 1.
class ThetaPath {
 public:
  ThetaPath() = default;
  ThetaPath(int T, double theta0) : vals_(static_cast<std::size_t>(T) + 1, theta0) {
    if (T < 1) throw std::invalid_argument("ThetaPath: T must be >= 1");
  }

  int T() const { return static_cast<int>(vals_.size()) - 1; }
  double theta0() const { return vals_[0]; }
  double operator[](int t) const { return vals_[static_cast<std::size_t>(t)]; }

  void set(int t, double v) {
    if (t < 1 || t > T()) throw std::out_of_range("ThetaPath::set: t must be in [1, T]");
    vals_[static_cast<std::size_t>(t)] = v;
  }

  const std::vector<double>& values() const { return vals_; }

 private:
  std::vector<double> vals_;
};

struct DyadSeries {
  int i = 0;
  int j = 0;
  std::vector<DyadCategory> categories;  // index 0 holds time t=1

  int T() const { return static_cast<int>(categories.size()); }
  DyadCategory cat(int t) const { return categories[static_cast<std::size_t>(t) - 1]; }
};

struct CategoryProbs {
  double p00 = 0.0, p10 = 0.0, p01 = 0.0, p11 = 0.0;

  double get(DyadCategory c) const {
    switch (c) {
      case DyadCategory::C00: return p00;
      case DyadCategory::C10: return p10;
      case DyadCategory::C01: return p01;
      default: return p11;
    }
  }
};

inline CategoryProbs category_probs(const ThetaTriple& theta) {
  if (!theta.finite()) throw std::invalid_argument("category_probs: theta must be finite");
  const double lw0 = 0.0;
  const double lw1 = theta.theta1;
  const double lw2 = theta.theta2;
  const double lw3 = theta.theta1 + theta.theta2 + theta.theta3;
  const double m = std::max(std::max(lw0, lw1), std::max(lw2, lw3));
  const double e0 = std::exp(lw0 - m);
  const double e1 = std::exp(lw1 - m);
  const double e2 = std::exp(lw2 - m);
  const double e3 = std::exp(lw3 - m);
  const double z = e0 + e1 + e2 + e3;
  return {e0 / z, e1 / z, e2 / z, e3 / z};
}

// log of the four-weight normalizer, with the same max-subtraction.
inline double log_normalizer(const ThetaTriple& theta) {
  const double lw1 = theta.theta1;
  const double lw2 = theta.theta2;
  const double lw3 = theta.theta1 + theta.theta2 + theta.theta3;
  const double m = std::max(std::max(0.0, lw1), std::max(lw2, lw3));
  return m + std::log(std::exp(-m) + std::exp(lw1 - m) + std::exp(lw2 - m) + std::exp(lw3 - m));
}

struct LinkProbs {
  double pij = 0.0;  // Pr(y[i->j] = 1)
  double pji = 0.0;  // Pr(y[j->i] = 1)
};

inline LinkProbs link_probs(const ThetaTriple& theta) {
  const CategoryProbs p = category_probs(theta);
  return {p.p10 + p.p11, p.p01 + p.p11};
}

inline void check_path_lengths(const ThetaPath& p1, const ThetaPath& p2, const ThetaPath& p3,
                               const DyadSeries& obs) {
  if (p1.T() != obs.T() || p2.T() != obs.T() || p3.T() != obs.T()) {
    throw std::invalid_argument("theta paths and observation series disagree on T");
  }
}

inline double dyad_loglik(const ThetaPath& p1, const ThetaPath& p2, const ThetaPath& p3,
                          const DyadSeries& obs) {
  check_path_lengths(p1, p2, p3, obs);
  double ll = 0.0;
  for (int t = 1; t <= obs.T(); ++t) {
    const DyadCategory c = obs.cat(t);
    const int y1 = y_first(c);
    const int y2 = y_second(c);
    const ThetaTriple th{p1[t], p2[t], p3[t]};
    ll += y1 * th.theta1 + y2 * th.theta2 + (y1 * y2) * th.theta3 - log_normalizer(th);
  }
  return ll;
}

struct GradInfo {
  double g = 0.0;  // first derivative of the log-likelihood at (t, r)
  double G = 0.0;  // negated second derivative (Bernoulli variance), >= 0
};

inline GradInfo grad_info(const ThetaPath& p1, const ThetaPath& p2, const ThetaPath& p3,
                          const DyadSeries& obs, int t, int r) {
  check_path_lengths(p1, p2, p3, obs);
  if (t < 1 || t > obs.T()) throw std::out_of_range("grad_info: t must be in [1, T]");
  const CategoryProbs p = category_probs({p1[t], p2[t], p3[t]});
  const DyadCategory c = obs.cat(t);
  double q, resp;
  switch (r) {
    case 1: q = p.p10 + p.p11; resp = y_first(c); break;
    case 2: q = p.p01 + p.p11; resp = y_second(c); break;
    case 3: q = p.p11; resp = y_first(c) * y_second(c); break;
    default: throw std::out_of_range("grad_info: r must be 1, 2 or 3");
  }
  return {resp - q, q * (1.0 - q)};
}

// Inverse multinomial logit of a probability vector over the four categories.
inline ThetaTriple init_from_proportions(double p00, double p10, double p01, double p11) {
  if (!(p00 > 0.0) || !(p10 > 0.0) || !(p01 > 0.0) || !(p11 > 0.0)) {
    throw std::invalid_argument("init_from_proportions: proportions must be positive");
  }
  return {std::log(p10 / p00), std::log(p01 / p00), std::log(p11 * p00 / (p10 * p01))};
}

enum class InitMode { TimeAverage, LogitMargins, Zeros };

// Anchor for the fixed theta_0: pooled-category inverse logit (TimeAverage,
// with one half-count of smoothing per cell), marginal link-rate logits with
// no reciprocity (LogitMargins), or the uniform-category origin (Zeros).
inline ThetaTriple empirical_init(const NetworkSeries& series, InitMode mode) {
  if (mode == InitMode::Zeros) return {0.0, 0.0, 0.0};
  if (mode == InitMode::LogitMargins) {
    double links = 0.0;
    for (int t = 0; t < series.T(); ++t) links += series.links_at(t);
    const double cells = static_cast<double>(series.T()) * series.n() * (series.n() - 1);
    const double rate = (links + 0.5) / (cells + 1.0);
    return {logit(rate), logit(rate), 0.0};
  }
  std::array<double, 4> count{0.5, 0.5, 0.5, 0.5};
  for (int t = 0; t < series.T(); ++t) {
    for (int i = 0; i < series.n(); ++i) {
      for (int j = i + 1; j < series.n(); ++j) {
        const DyadCategory c = make_category(series.get(t, i, j), series.get(t, j, i));
        count[static_cast<int>(c)] += 1.0;
      }
    }
  }
  const double total = count[0] + count[1] + count[2] + count[3];
  return init_from_proportions(count[0] / total, count[1] / total, count[2] / total,
                               count[3] / total);
}

inline std::size_t dyad_count(int n) {
  return static_cast<std::size_t>(n) * (n - 1) / 2;
}

// Canonical dyad order: (0,1), (0,2), ..., (0,n-1), (1,2), ...
inline std::vector<DyadSeries> extract_dyads(const NetworkSeries& series) {
  std::vector<DyadSeries> out;
  out.reserve(dyad_count(series.n()));
  for (int i = 0; i < series.n(); ++i) {
    for (int j = i + 1; j < series.n(); ++j) {
      DyadSeries d;
      d.i = i;
      d.j = j;
      d.categories.resize(static_cast<std::size_t>(series.T()));
      for (int t = 0; t < series.T(); ++t) {
        d.categories[static_cast<std::size_t>(t)] =
            make_category(series.get(t, i, j), series.get(t, j, i));
      }
      out.push_back(std::move(d));
    }
  }
  return out;
}

inline DyadCategory sample_category(const CategoryProbs& p, Rng& rng) {
  const double u = rng.uniform();
  if (u < p.p00) return DyadCategory::C00;
  if (u < p.p00 + p.p10) return DyadCategory::C10;
  if (u < p.p00 + p.p10 + p.p01) return DyadCategory::C01;
  return DyadCategory::C11;
}

}  // namespace netfuse
