#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "netfuse/dyad_model.hpp"
#include "netfuse/errors.hpp"
#include "netfuse/fused_map.hpp"
#include "netfuse/mcmc.hpp"
#include "netfuse/network.hpp"
#include "netfuse/parallel.hpp"
#include "netfuse/rng.hpp"

// Penalty selection (rolling one-step-ahead CV on AUC, and BIC over the full
// window), link prediction for time T+1 (MAP plug-in and posterior Monte
// Carlo), ROC/AUC evaluation, and the change-point fraction series.

namespace netfuse {

// Inclusive linear grid of penalty values.
inline std::vector<double> make_grid(double lo, double hi, int count) {
  if (count < 1) throw std::invalid_argument("make_grid: count must be >= 1");
  if (!(lo > 0.0)) throw std::invalid_argument("make_grid: grid values must be > 0");
  if (count == 1) {
    if (hi < lo) throw std::invalid_argument("make_grid: hi must be >= lo");
    return {lo};
  }
  if (!(hi > lo)) throw std::invalid_argument("make_grid: hi must be > lo for count > 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<std::size_t>(k)] = lo + (hi - lo) * static_cast<double>(k) / (count - 1);
  }
  out.back() = hi;
  return out;
}

inline void validate_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("lambda grid must be nonempty");
  double prev = 0.0;
  for (double g : grid) {
    if (!(g > prev)) {
      throw std::invalid_argument("lambda grid must be strictly increasing and positive");
    }
    prev = g;
  }
}

// Link-probability matrix for the next snapshot; diagonal pinned at zero.
struct PredictionMatrix {
  int n = 0;
  std::vector<double> p;  // row-major n x n

  PredictionMatrix() = default;
  explicit PredictionMatrix(int n_nodes)
      : n(n_nodes), p(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(n_nodes), 0.0) {
    if (n_nodes < 2) throw std::invalid_argument("PredictionMatrix: need n >= 2");
  }

  double at(int i, int j) const {
    return p[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
             static_cast<std::size_t>(j)];
  }
  double& at(int i, int j) {
    return p[static_cast<std::size_t>(i) * static_cast<std::size_t>(n) +
             static_cast<std::size_t>(j)];
  }
};

namespace sp_detail {

inline void check_canonical(const std::vector<DyadFit>& fits, int n) {
  if (fits.size() != dyad_count(n)) {
    throw std::invalid_argument("fits do not cover every dyad of an n-node network");
  }
  std::size_t k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      if (fits[k].i != i || fits[k].j != j) {
        throw std::invalid_argument("fits are not in canonical dyad order");
      }
    }
  }
}

}  // namespace sp_detail

// Plug-in one-step-ahead prediction: evaluate link probabilities at the
// fitted theta_T of every dyad.
inline PredictionMatrix predict_map(const std::vector<DyadFit>& fits, int n) {
  sp_detail::check_canonical(fits, n);
  PredictionMatrix out(n);
  for (const DyadFit& f : fits) {
    const int T = f.paths[0].T();
    const ThetaTriple last{f.paths[0][T], f.paths[1][T], f.paths[2][T]};
    const LinkProbs lp = link_probs(last);
    out.at(f.i, f.j) = lp.pij;
    out.at(f.j, f.i) = lp.pji;
  }
  return out;
}

// Posterior-predictive Monte Carlo: for each retained draw, push theta_T one
// step with Laplace(1/lambda_draw) innovations and average the implied link
// probabilities. The loop is draw-major with dyads inner and a single RNG,
// so the result is reproducible regardless of worker configuration.
inline PredictionMatrix predict_mcmc(const PosteriorDraws& draws, Rng& rng) {
  if (draws.samples < 1 || draws.n_dyads == 0) {
    throw std::invalid_argument("predict_mcmc: empty draws");
  }
  PredictionMatrix out(draws.n);
  std::vector<int> ii, jj;
  ii.reserve(draws.n_dyads);
  jj.reserve(draws.n_dyads);
  for (int i = 0; i < draws.n; ++i) {
    for (int j = i + 1; j < draws.n; ++j) {
      ii.push_back(i);
      jj.push_back(j);
    }
  }
  for (int b = 0; b < draws.samples; ++b) {
    const double scale = 1.0 / draws.lambda[static_cast<std::size_t>(b)];
    for (std::size_t d = 0; d < draws.n_dyads; ++d) {
      ThetaTriple th = draws.theta_last[static_cast<std::size_t>(b) * draws.n_dyads + d];
      th.theta1 += rng.laplace(scale);
      th.theta2 += rng.laplace(scale);
      th.theta3 += rng.laplace(scale);
      const LinkProbs lp = link_probs(th);
      out.at(ii[d], jj[d]) += lp.pij;
      out.at(jj[d], ii[d]) += lp.pji;
    }
  }
  for (double& x : out.p) x /= static_cast<double>(draws.samples);
  return out;
}

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// Threshold-sweep ROC; the trapezoid area equals the Mann-Whitney
// concordance statistic with ties counted one half.
inline RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("roc_auc: scores and labels must be nonempty and equal-length");
  }
  std::size_t pos = 0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (labels[k] != 0 && labels[k] != 1) {
      throw std::invalid_argument("roc_auc: labels must be 0/1");
    }
    if (!std::isfinite(scores[k])) throw std::invalid_argument("roc_auc: non-finite score");
    pos += static_cast<std::size_t>(labels[k]);
  }
  const std::size_t neg = labels.size() - pos;
  if (pos == 0 || neg == 0) {
    throw DataError("roc_auc: AUC undefined for single-class labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  RocCurve out;
  out.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double s = scores[order[k]];
    std::size_t dtp = 0, dfp = 0;
    while (k < order.size() && scores[order[k]] == s) {
      if (labels[order[k]] == 1) {
        ++dtp;
      } else {
        ++dfp;
      }
      ++k;
    }
    tp += dtp;
    fp += dfp;
    const double fpr = static_cast<double>(fp) / static_cast<double>(neg);
    const double tpr = static_cast<double>(tp) / static_cast<double>(pos);
    out.auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    out.points.push_back({s, fpr, tpr});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  return out;
}

// At equal score, which end of the grid wins the argmax.
enum class TieBreak { SmallerLambda, LargerLambda };

namespace sp_detail {

inline bool improves(double cand, double best, TieBreak tie) {
  if (cand > best) return true;
  return tie == TieBreak::LargerLambda && cand == best;
}

// Scores and labels for one held-out snapshot: every ordered off-diagonal
// cell pooled into one vector pair.
inline void pool_cells(const PredictionMatrix& pm, const NetworkSeries& series, int t0,
                       std::vector<double>& scores, std::vector<int>& labels) {
  scores.clear();
  labels.clear();
  for (int i = 0; i < series.n(); ++i) {
    for (int j = 0; j < series.n(); ++j) {
      if (i == j) continue;
      scores.push_back(pm.at(i, j));
      labels.push_back(series.get(t0, i, j) ? 1 : 0);
    }
  }
}

}  // namespace sp_detail

struct CvResult {
  double lambda_star = 0.0;
  std::size_t lambda_index = 0;
  std::vector<double> grid;
  std::vector<double> mean_auc;               // per grid value, over scored folds
  std::vector<std::vector<double>> fold_auc;  // [fold][grid]; NaN on skipped folds
  std::vector<int> fold_fit_T;                // training prefix length per fold
  std::vector<double> fold_seconds;
  std::vector<int> skipped_folds;             // degenerate held-out snapshots
};

// Rolling-origin CV: for each of the last cal_window origins t, fit on
// Y_1..Y_t at every grid value (warm-started in ascending order) and score
// the AUC of the one-step-ahead prediction against Y_{t+1}. Folds whose
// held-out snapshot is all-zeros or all-ones are skipped with a record.
inline CvResult cv_select_lambda(const NetworkSeries& series, const std::vector<double>& grid,
                                 int cal_window, InitMode init_mode = InitMode::TimeAverage,
                                 const BregmanConfig& base = BregmanConfig{},
                                 const WorkerPool* pool = nullptr,
                                 TieBreak tie = TieBreak::SmallerLambda) {
  validate_grid(grid);
  if (cal_window < 1 || series.T() - cal_window < 2) {
    throw std::invalid_argument(
        "cv_select_lambda: need cal_window >= 1 and T - cal_window >= 2");
  }
  CvResult out;
  out.grid = grid;
  out.mean_auc.assign(grid.size(), 0.0);
  std::vector<int> scored(grid.size(), 0);

  std::vector<double> scores;
  std::vector<int> labels;
  for (int f = 0; f < cal_window; ++f) {
    const auto fold_start = std::chrono::steady_clock::now();
    const int fit_T = series.T() - cal_window + f;
    out.fold_fit_T.push_back(fit_T);
    auto& row = out.fold_auc.emplace_back(grid.size(), std::numeric_limits<double>::quiet_NaN());

    // Degeneracy of the held-out snapshot does not depend on lambda.
    const int held = fit_T;  // 0-based index of snapshot t = fit_T + 1
    const int links = series.links_at(held);
    const int cells = series.n() * (series.n() - 1);
    if (links == 0 || links == cells) {
      out.skipped_folds.push_back(f);
      out.fold_seconds.push_back(
          std::chrono::duration<double>(std::chrono::steady_clock::now() - fold_start).count());
      continue;
    }

    const NetworkSeries train = series.prefix(fit_T);
    const ThetaTriple theta0 = empirical_init(train, init_mode);
    std::vector<DyadFit> warm;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      BregmanConfig cfg = base;
      cfg.lambda = grid[g];
      // The splitting weight only conditions the solver (the optimum does not
      // depend on it); let it track the penalty so large-lambda grid points
      // converge in the same iteration budget as small ones.
      cfg.mu = std::max(base.mu, grid[g]);
      std::vector<DyadFit> fits =
          fit_map_all(train, theta0, cfg, pool, warm.empty() ? nullptr : &warm);
      const PredictionMatrix pm = predict_map(fits, series.n());
      sp_detail::pool_cells(pm, series, held, scores, labels);
      const double auc = roc_auc(scores, labels).auc;
      row[g] = auc;
      out.mean_auc[g] += auc;
      ++scored[g];
      warm = std::move(fits);
    }
    out.fold_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - fold_start).count());
  }

  if (out.skipped_folds.size() == static_cast<std::size_t>(cal_window)) {
    throw DataError("cv_select_lambda: every fold's held-out snapshot was degenerate");
  }
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    out.mean_auc[g] /= static_cast<double>(scored[g]);
    if (sp_detail::improves(out.mean_auc[g], best, tie)) {
      best = out.mean_auc[g];
      out.lambda_index = g;
    }
  }
  out.lambda_star = grid[out.lambda_index];
  return out;
}

struct BicResult {
  double lambda_star = 0.0;
  std::size_t lambda_index = 0;
  std::vector<double> grid;
  std::vector<double> bic;  // per grid value
  std::vector<DyadFit> fits_at_star;
};

// Fit the full window at every grid value (ascending, warm-started) and keep
// the one maximizing the block-penalized information criterion. Equal scores
// break toward the larger penalty by default: at equal fit quality the more
// parsimonious (more fused) model wins.
inline BicResult bic_select_lambda(const NetworkSeries& series, const std::vector<double>& grid,
                                   InitMode init_mode = InitMode::TimeAverage,
                                   const BregmanConfig& base = BregmanConfig{},
                                   const WorkerPool* pool = nullptr,
                                   TieBreak tie = TieBreak::LargerLambda) {
  validate_grid(grid);
  if (series.T() < 2) throw std::invalid_argument("bic_select_lambda: need T >= 2");
  BicResult out;
  out.grid = grid;
  const ThetaTriple theta0 = empirical_init(series, init_mode);
  std::vector<DyadFit> warm;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < grid.size(); ++g) {
    BregmanConfig cfg = base;
    cfg.lambda = grid[g];
    // Keep the splitting weight on the penalty's scale (see cv_select_lambda).
    cfg.mu = std::max(base.mu, grid[g]);
    std::vector<DyadFit> fits =
        fit_map_all(series, theta0, cfg, pool, warm.empty() ? nullptr : &warm);
    const double score = bic_score(fits, series, grid[g]);
    out.bic.push_back(score);
    if (sp_detail::improves(score, best, tie)) {
      best = score;
      out.lambda_index = g;
      out.fits_at_star = fits;
    }
    warm = std::move(fits);
  }
  out.lambda_star = grid[out.lambda_index];
  return out;
}

// Fraction of dyads whose fitted path moves between consecutive times; one
// value per t = 2..T. The 1e-8 tolerance matches the block counter's notion
// of "a change".
inline std::vector<double> changepoint_series(const std::vector<DyadFit>& fits) {
  if (fits.empty()) throw std::invalid_argument("changepoint_series: no fits");
  const int T = fits[0].paths[0].T();
  for (const DyadFit& f : fits) {
    for (int r = 0; r < 3; ++r) {
      if (f.paths[r].T() != T) {
        throw std::invalid_argument("changepoint_series: fits disagree on T");
      }
    }
  }
  if (T < 2) return {};
  std::vector<double> out(static_cast<std::size_t>(T) - 1, 0.0);
  for (const DyadFit& f : fits) {
    for (int t = 2; t <= T; ++t) {
      bool change = false;
      for (int r = 0; r < 3; ++r) {
        change = change || std::fabs(f.paths[r][t] - f.paths[r][t - 1]) > 1e-8;
      }
      if (change) out[static_cast<std::size_t>(t) - 2] += 1.0;
    }
  }
  for (double& x : out) x /= static_cast<double>(fits.size());
  return out;
}

}  // namespace netfuse
