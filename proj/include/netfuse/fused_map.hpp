#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "netfuse/dyad_model.hpp"
#include "netfuse/parallel.hpp"

// MAP estimation of the three theta paths of one dyad under an L1 penalty on
// successive differences, by Split Bregman iteration: the path likelihood is
// decoupled from the penalty through split variables b ~ (L theta) and duals
// v, giving (i) a smooth coordinatewise Newton subproblem in theta, (ii) a
// soft-thresholding update of b, and (iii) a dual ascent step on v.

namespace netfuse {

struct BregmanConfig {
  double lambda = 1.0;    // difference penalty, >= 0
  double mu = 1.0;        // augmentation weight, > 0
  double delta = -1.0;    // dual step; any value <= 0 resolves to mu
  double tol = 1e-5;      // relative-change stopping threshold
  int max_iter = 2000;
  int inner_sweeps = 1;   // coordinate sweeps per subproblem (i)
  double snap_tol = -1.0; // run-consolidation width; < 0 resolves to 10*tol, 0 disables

  double resolved_delta() const { return delta > 0.0 ? delta : mu; }
  double resolved_snap() const { return snap_tol < 0.0 ? 10.0 * tol : snap_tol; }

  void validate() const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("BregmanConfig: lambda must be >= 0");
    if (!(mu > 0.0)) throw std::invalid_argument("BregmanConfig: mu must be > 0");
    if (resolved_delta() > mu) throw std::invalid_argument("BregmanConfig: need delta <= mu");
    if (!(tol > 0.0)) throw std::invalid_argument("BregmanConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("BregmanConfig: max_iter must be >= 1");
    if (inner_sweeps < 1) throw std::invalid_argument("BregmanConfig: inner_sweeps must be >= 1");
  }
};

struct DyadFit {
  int i = -1;
  int j = -1;
  std::array<ThetaPath, 3> paths;
  std::array<std::vector<double>, 3> b;  // split variables, length T
  std::array<std::vector<double>, 3> v;  // dual variables, length T
  int iterations = 0;
  double final_rel_change = std::numeric_limits<double>::infinity();
  double kkt_residual = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
};

inline double soft_threshold(double w, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("soft_threshold: kappa must be >= 0");
  const double a = std::fabs(w) - kappa;
  return a > 0.0 ? (w > 0.0 ? a : -a) : 0.0;
}

inline std::vector<double> soft_threshold(const std::vector<double>& w, double kappa) {
  if (!(kappa >= 0.0)) throw std::invalid_argument("soft_threshold: kappa must be >= 0");
  std::vector<double> out(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) out[k] = soft_threshold(w[k], kappa);
  return out;
}

// Log-likelihood minus lambda times the total variation of each path,
// including the anchored theta_0 -> theta_1 difference.
inline double penalized_objective(const std::array<ThetaPath, 3>& paths, const DyadSeries& obs,
                                  double lambda) {
  double pen = 0.0;
  for (const ThetaPath& p : paths) {
    if (p.T() != obs.T()) throw std::invalid_argument("penalized_objective: length mismatch");
    for (int t = 1; t <= p.T(); ++t) pen += std::fabs(p[t] - p[t - 1]);
  }
  return dyad_loglik(paths[0], paths[1], paths[2], obs) - lambda * pen;
}

// Exact maximizer of the quadratic surrogate of subproblem (i) in coordinate
// (t, r): the log-likelihood term is replaced by its second-order expansion
// at the current iterate and the coupling terms (mu/2)(d_t - b_t + v_t/mu)^2
// for the one or two differences touching theta_t are kept exactly.
inline double coordinate_update(const std::array<ThetaPath, 3>& paths, const DyadSeries& obs,
                                const std::array<std::vector<double>, 3>& b,
                                const std::array<std::vector<double>, 3>& v,
                                const BregmanConfig& cfg, int t, int r) {
  const int T = obs.T();
  if (t < 1 || t > T) throw std::out_of_range("coordinate_update: t must be in [1, T]");
  const GradInfo gi = grad_info(paths[0], paths[1], paths[2], obs, t, r);
  const double mu = cfg.mu;
  const ThetaPath& pr = paths[static_cast<std::size_t>(r) - 1];
  const std::vector<double>& br = b[static_cast<std::size_t>(r) - 1];
  const std::vector<double>& vr = v[static_cast<std::size_t>(r) - 1];
  const double th = pr[t];
  if (t == T) {
    return (gi.G * th + gi.g - vr[T - 1] + mu * (pr[T - 1] + br[T - 1])) / (gi.G + mu);
  }
  return (gi.G * th + gi.g - (vr[t - 1] - vr[t]) +
          mu * (pr[t - 1] + pr[t + 1] + br[t - 1] - br[t])) /
         (gi.G + 2.0 * mu);
}

namespace map_detail {

// Consolidate numerically-fused runs to exactly equal values: within each
// maximal run of consecutive near-equal entries (t = 1..T), replace all by
// their mean; a leading run lands exactly on the theta_0 anchor when it is
// already within the same width. Width is a few orders above solver noise
// and far below any real jump, so block counts become exact.
inline void snap_runs(ThetaPath& p, double width) {
  const int T = p.T();
  int start = 1;
  while (start <= T) {
    int end = start;
    while (end < T && std::fabs(p[end + 1] - p[end]) <= width) ++end;
    if (end > start) {
      double mean = 0.0;
      for (int t = start; t <= end; ++t) mean += p[t];
      mean /= static_cast<double>(end - start + 1);
      for (int t = start; t <= end; ++t) p.set(t, mean);
    }
    if (start == 1 && std::fabs(p[start] - p.theta0()) <= width) {
      for (int t = start; t <= end; ++t) p.set(t, p.theta0());
    }
    start = end + 1;
  }
}

}  // namespace map_detail

// Max over (t, r) of the distance from the likelihood gradient to the penalty
// subdifferential: |g_t - lambda*(s_t - s_{t+1})| minimized over admissible
// signs, where s_t is pinned to sgn(theta_t - theta_{t-1}) on differences
// larger than zero_tol and free in [-1, 1] otherwise (interval arithmetic).
inline double kkt_residual(const DyadFit& fit, const DyadSeries& obs, double lambda,
                           double zero_tol = 1e-6) {
  const int T = obs.T();
  double worst = 0.0;
  for (int r = 1; r <= 3; ++r) {
    const ThetaPath& p = fit.paths[static_cast<std::size_t>(r) - 1];
    std::vector<double> slo(static_cast<std::size_t>(T)), shi(static_cast<std::size_t>(T));
    for (int t = 1; t <= T; ++t) {
      const double d = p[t] - p[t - 1];
      if (std::fabs(d) <= zero_tol) {
        slo[t - 1] = -1.0;
        shi[t - 1] = 1.0;
      } else {
        slo[t - 1] = shi[t - 1] = d > 0.0 ? 1.0 : -1.0;
      }
    }
    for (int t = 1; t <= T; ++t) {
      const double g = grad_info(fit.paths[0], fit.paths[1], fit.paths[2], obs, t, r).g;
      const double lo = lambda * (t < T ? slo[t - 1] - shi[t] : slo[t - 1]);
      const double hi = lambda * (t < T ? shi[t - 1] - slo[t] : shi[t - 1]);
      const double resid = g < lo ? lo - g : (g > hi ? g - hi : 0.0);
      if (resid > worst) worst = resid;
    }
  }
  return worst;
}

// Fit one dyad. `warm` optionally supplies starting paths/b/v (for ascending
// penalty grids); `objective_trace` optionally records the penalized
// objective after every outer iteration.
inline DyadFit fit_map_dyad(const DyadSeries& obs, const ThetaTriple& theta0,
                            const BregmanConfig& cfg, const DyadFit* warm = nullptr,
                            std::vector<double>* objective_trace = nullptr) {
  cfg.validate();
  const int T = obs.T();
  if (T < 1) throw std::invalid_argument("fit_map_dyad: need T >= 1");

  DyadFit fit;
  fit.i = obs.i;
  fit.j = obs.j;
  if (warm != nullptr && warm->paths[0].T() == T) {
    fit.paths = warm->paths;
    fit.b = warm->b;
    fit.v = warm->v;
    for (int r = 0; r < 3; ++r) {
      if (fit.paths[r].theta0() != theta0.get(r + 1)) {
        throw std::invalid_argument("fit_map_dyad: warm start disagrees on theta_0");
      }
    }
  } else {
    for (int r = 0; r < 3; ++r) {
      fit.paths[r] = ThetaPath(T, theta0.get(r + 1));
      fit.b[r].assign(static_cast<std::size_t>(T), 0.0);
      fit.v[r].assign(static_cast<std::size_t>(T), 0.0);
    }
  }

  const double mu = cfg.mu;
  const double delta = cfg.resolved_delta();
  std::array<std::vector<double>, 3> old_vals;
  for (int m = 1; m <= cfg.max_iter; ++m) {
    for (int r = 0; r < 3; ++r) old_vals[r] = fit.paths[r].values();

    for (int sweep = 0; sweep < cfg.inner_sweeps; ++sweep) {
      for (int r = 1; r <= 3; ++r) {
        for (int t = 1; t <= T; ++t) {
          fit.paths[r - 1].set(t, coordinate_update(fit.paths, obs, fit.b, fit.v, cfg, t, r));
        }
      }
    }
    for (int r = 0; r < 3; ++r) {
      const ThetaPath& p = fit.paths[r];
      std::vector<double> w(static_cast<std::size_t>(T));
      for (int t = 1; t <= T; ++t) w[t - 1] = (p[t] - p[t - 1]) + fit.v[r][t - 1] / mu;
      fit.b[r] = soft_threshold(w, cfg.lambda / mu);
      for (int t = 1; t <= T; ++t) {
        fit.v[r][t - 1] += delta * ((p[t] - p[t - 1]) - fit.b[r][t - 1]);
      }
    }

    double num = 0.0, den = 1.0, primal = 0.0;
    for (int r = 0; r < 3; ++r) {
      for (int t = 1; t <= T; ++t) {
        num = std::max(num, std::fabs(fit.paths[r][t] - old_vals[r][static_cast<std::size_t>(t)]));
        den = std::max(den, std::fabs(old_vals[r][static_cast<std::size_t>(t)]));
        primal = std::max(primal, std::fabs((fit.paths[r][t] - fit.paths[r][t - 1]) -
                                            fit.b[r][static_cast<std::size_t>(t) - 1]));
      }
    }
    fit.final_rel_change = num / den;
    fit.iterations = m;
    if (objective_trace != nullptr) {
      objective_trace->push_back(penalized_objective(fit.paths, obs, cfg.lambda));
    }
    // Stop only once the iterate has stagnated AND the splitting constraint
    // d = b holds to tolerance; the latter is what makes fused runs land
    // within snapping range of exact equality.
    if (fit.final_rel_change < cfg.tol && primal < cfg.tol) {
      fit.converged = true;
      break;
    }
  }

  const double snap = cfg.resolved_snap();
  if (snap > 0.0 && cfg.lambda > 0.0) {
    for (int r = 0; r < 3; ++r) map_detail::snap_runs(fit.paths[r], snap);
  }
  fit.kkt_residual = kkt_residual(fit, obs, cfg.lambda);
  return fit;
}

// Number of maximal runs of equal consecutive values among (theta_1, ...,
// theta_T), summed over the three paths; equality means |difference| < 1e-8.
inline int block_df(const std::array<ThetaPath, 3>& paths) {
  int blocks = 0;
  for (const ThetaPath& p : paths) {
    ++blocks;
    for (int t = 2; t <= p.T(); ++t) {
      if (!(std::fabs(p[t] - p[t - 1]) < 1e-8)) ++blocks;
    }
  }
  return blocks;
}

// All dyads of a series, scheduled over the pool; slot k holds the fit of the
// k-th canonical dyad, so output is identical for any worker count. `warm`
// optionally supplies one aligned warm start per dyad.
inline std::vector<DyadFit> fit_map_all(const NetworkSeries& series, const ThetaTriple& theta0,
                                        const BregmanConfig& cfg,
                                        const WorkerPool* pool = nullptr,
                                        const std::vector<DyadFit>* warm = nullptr) {
  const std::vector<DyadSeries> dyads = extract_dyads(series);
  if (warm != nullptr && warm->size() != dyads.size()) {
    throw std::invalid_argument("fit_map_all: warm-start size mismatch");
  }
  std::vector<DyadFit> fits(dyads.size());
  auto job = [&](std::size_t k) {
    fits[k] = fit_map_dyad(dyads[k], theta0, cfg, warm != nullptr ? &(*warm)[k] : nullptr);
  };
  if (pool != nullptr) {
    pool->run(dyads.size(), job);
  } else {
    for (std::size_t k = 0; k < dyads.size(); ++k) job(k);
  }
  return fits;
}

// BIC = sum over dyads of [2 * loglik - block_df * log(T-1)]; larger is
// better. `fits` must hold one fit per canonical dyad of `series`.
inline double bic_score(const std::vector<DyadFit>& fits, const NetworkSeries& series,
                        [[maybe_unused]] double lambda) {
  const int T = series.T();
  if (T < 2) throw std::invalid_argument("bic_score: need T >= 2");
  const std::vector<DyadSeries> dyads = extract_dyads(series);
  if (fits.size() != dyads.size()) throw std::invalid_argument("bic_score: missing dyad fit");
  double total = 0.0;
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (fits[k].i != dyads[k].i || fits[k].j != dyads[k].j) {
      throw std::invalid_argument("bic_score: fits are not in canonical dyad order");
    }
    const double ll = dyad_loglik(fits[k].paths[0], fits[k].paths[1], fits[k].paths[2], dyads[k]);
    total += 2.0 * ll - block_df(fits[k].paths) * std::log(static_cast<double>(T - 1));
  }
  return total;
}

}  // namespace netfuse
