#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "netfuse/dyad_model.hpp"
#include "netfuse/ess.hpp"
#include "netfuse/mathutil.hpp"
#include "netfuse/parallel.hpp"
#include "netfuse/polya_gamma.hpp"
#include "netfuse/rng.hpp"

// Full Bayesian treatment of the dyad paths. Each coordinate's likelihood is
// a Bernoulli logit in theta_{t,r} once the exact offset C_r of the other two
// coordinates is absorbed, so Polya-Gamma latents omega make the conditional
// Gaussian with pseudo-observations y* = kappa/omega - C. Paths are then
// redrawn either jointly (FFBS on a local-level state-space model, with the
// double-exponential increments represented as a normal scale mixture via
// tau^2) or sitewise (exact truncated-normal mixture conditionals). The
// global penalty rate lambda gets a conjugate Gamma update.

namespace netfuse {

enum class McmcScheme { FFBS, Direct };

struct McmcConfig {
  McmcScheme scheme = McmcScheme::FFBS;
  int burn_in = 2000;
  int samples = 20000;  // retained draws
  int thin = 1;
  double a = 1.0;  // lambda prior shape
  double b = 0.2;  // lambda prior rate
  std::uint64_t seed = 1;
  bool record_monitor = true;  // keep per-scalar chains for ESS reporting

  void validate() const {
    if (samples < 1) throw std::invalid_argument("McmcConfig: samples must be >= 1");
    if (thin < 1) throw std::invalid_argument("McmcConfig: thin must be >= 1");
    if (burn_in < 0) throw std::invalid_argument("McmcConfig: burn_in must be >= 0");
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("McmcConfig: need a, b > 0");
  }
};

// Exact offset making the pair likelihood, viewed in theta_r alone, a
// Bernoulli logit: Pr(response_r = 1) = logistic(theta_r + C_r).
inline double conditional_offset(const ThetaTriple& theta, int r) {
  switch (r) {
    case 1: return log1pexp(theta.theta2 + theta.theta3) - log1pexp(theta.theta2);
    case 2: return log1pexp(theta.theta1 + theta.theta3) - log1pexp(theta.theta1);
    case 3: {
      const double m = std::max(std::max(0.0, theta.theta1), theta.theta2);
      const double lse =
          m + std::log(std::exp(-m) + std::exp(theta.theta1 - m) + std::exp(theta.theta2 - m));
      return theta.theta1 + theta.theta2 - lse;
    }
    default: throw std::out_of_range("conditional_offset: r must be 1, 2 or 3");
  }
}

// The binary response whose logit carries theta_r: y_ij, y_ji, or their
// product.
inline int coord_response(DyadCategory c, int r) {
  switch (r) {
    case 1: return y_first(c);
    case 2: return y_second(c);
    case 3: return y_first(c) * y_second(c);
    default: throw std::out_of_range("coord_response: r must be 1, 2 or 3");
  }
}

// kappa/omega - C, the Gaussian pseudo-observation of theta_{t,r} given its
// Polya-Gamma latent; kappa = response - 1/2.
inline double pseudo_obs(const ThetaTriple& theta, int r, DyadCategory category, double omega) {
  if (!(omega > 0.0)) throw std::invalid_argument("pseudo_obs: omega must be > 0");
  const double kappa = coord_response(category, r) - 0.5;
  return kappa / omega - conditional_offset(theta, r);
}

// Joint draw of (theta_1..theta_T) for one coordinate from the Gaussian full
// conditional of the local-level model: theta_t = theta_{t-1} + N(0, tau2_t),
// observed through y*_t = theta_t + N(0, 1/omega_t), theta_0 known.
inline void ffbs_draw_into(double theta0, const std::vector<double>& ystar,
                           const std::vector<double>& omega, const std::vector<double>& tau2,
                           Rng& rng, std::vector<double>& out) {
  const std::size_t T = ystar.size();
  if (omega.size() != T || tau2.size() != T || T == 0) {
    throw std::invalid_argument("ffbs_draw: inconsistent lengths");
  }
  std::vector<double> m(T + 1), C(T + 1);
  m[0] = theta0;
  C[0] = 0.0;
  for (std::size_t t = 1; t <= T; ++t) {
    const double R = C[t - 1] + tau2[t - 1];
    const double w = omega[t - 1];
    const double A = R * w / (R * w + 1.0);
    m[t] = m[t - 1] + A * (ystar[t - 1] - m[t - 1]);
    C[t] = R / (R * w + 1.0);
  }
  out.resize(T);
  out[T - 1] = m[T] + std::sqrt(C[T]) * rng.normal();
  for (std::size_t t = T - 1; t >= 1; --t) {
    const double B = C[t] / (C[t] + tau2[t]);  // tau2[t] belongs to step t -> t+1
    const double mean = m[t] + B * (out[t] - m[t]);
    const double var = C[t] * (1.0 - B);
    out[t - 1] = mean + std::sqrt(var) * rng.normal();
  }
}

inline std::vector<double> ffbs_draw(double theta0, const std::vector<double>& ystar,
                                     const std::vector<double>& omega,
                                     const std::vector<double>& tau2, Rng& rng) {
  std::vector<double> out;
  ffbs_draw_into(theta0, ystar, omega, tau2, rng, out);
  return out;
}

// One coordinate's evolution variances: 1/tau2_t ~ InverseGaussian with mean
// lambda/|delta_t| and shape lambda^2, independently per step; |delta| is
// floored at 1e-10 so exactly-fused neighbors keep a finite mean.
inline std::vector<double> sample_tau2(const ThetaPath& path, double lambda, Rng& rng) {
  if (!(lambda > 0.0)) throw std::invalid_argument("sample_tau2: lambda must be > 0");
  std::vector<double> out(static_cast<std::size_t>(path.T()));
  for (int t = 1; t <= path.T(); ++t) {
    double d = std::fabs(path[t] - path[t - 1]);
    if (d < 1e-10) d = 1e-10;
    const double inv = rng.inverse_gaussian(lambda / d, lambda * lambda);
    out[static_cast<std::size_t>(t) - 1] = 1.0 / inv;
  }
  return out;
}

// Truncated-normal mixture: the exact single-site conditional of theta_{t,r}
// given its pseudo-observation and neighbors under the L1 increment penalty.
struct TnComponent {
  double logw = -std::numeric_limits<double>::infinity();  // normalized log weight
  double mean = 0.0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct TnMixture {
  int k = 0;  // 2 (boundary site) or 3 (interior site)
  double sd = 1.0;
  std::array<TnComponent, 3> comp;

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    double cum = 0.0;
    int pick = -1;
    for (int c = 0; c < k; ++c) {
      cum += std::exp(comp[c].logw);
      if (u < cum) {
        pick = c;
        break;
      }
    }
    if (pick < 0) {  // u landed in rounding slack; take the heaviest component
      double best = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        if (comp[c].logw > best) {
          best = comp[c].logw;
          pick = c;
        }
      }
    }
    const TnComponent& tc = comp[pick];
    return rng.truncated_normal(tc.mean, sd, tc.lo, tc.hi);
  }

  double pdf(double x) const {
    double total = 0.0;
    for (int c = 0; c < k; ++c) {
      const TnComponent& tc = comp[c];
      if (x < tc.lo || x > tc.hi || tc.logw == -std::numeric_limits<double>::infinity()) {
        continue;
      }
      const double z = (x - tc.mean) / sd;
      const double a = (tc.lo - tc.mean) / sd;
      const double b = (tc.hi - tc.mean) / sd;
      total += std::exp(tc.logw - 0.5 * z * z - kLogSqrt2Pi - std::log(sd) -
                        log_norm_interval(a, b));
    }
    return total;
  }
};

// Site conditional ~ N(ystar, 1/omega) * exp(-lambda(|x - left| + |right - x|))
// split over the three sign regions (two when the site has one neighbor).
// Component weights are the exact region integrals, done in the log domain.
inline TnMixture direct_conditional(double ystar, double omega, double lambda, double left,
                                    std::optional<double> right = std::nullopt) {
  if (!(omega > 0.0)) throw std::invalid_argument("direct_conditional: omega must be > 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("direct_conditional: lambda must be >= 0");
  const double sr_w = std::sqrt(omega);
  TnMixture mix;
  mix.sd = 1.0 / sr_w;
  if (!right.has_value()) {
    const double m = left;
    mix.k = 2;
    mix.comp[0].mean = ystar + lambda / omega;
    mix.comp[0].hi = m;
    mix.comp[0].logw =
        -lambda * m + lambda * ystar + 0.5 * lambda * lambda / omega +
        norm_logcdf((m - mix.comp[0].mean) * sr_w);
    mix.comp[1].mean = ystar - lambda / omega;
    mix.comp[1].lo = m;
    mix.comp[1].logw =
        lambda * m - lambda * ystar + 0.5 * lambda * lambda / omega +
        norm_logcdf((mix.comp[1].mean - m) * sr_w);
  } else {
    const double xi = std::min(left, *right);
    const double zeta = std::max(left, *right);
    mix.k = 3;
    mix.comp[0].mean = ystar + 2.0 * lambda / omega;
    mix.comp[0].hi = xi;
    mix.comp[0].logw =
        -lambda * (xi + zeta) + 2.0 * lambda * ystar + 2.0 * lambda * lambda / omega +
        norm_logcdf((xi - mix.comp[0].mean) * sr_w);
    mix.comp[1].mean = ystar - 2.0 * lambda / omega;
    mix.comp[1].lo = zeta;
    mix.comp[1].logw =
        lambda * (xi + zeta) - 2.0 * lambda * ystar + 2.0 * lambda * lambda / omega +
        norm_logcdf((mix.comp[1].mean - zeta) * sr_w);
    mix.comp[2].mean = ystar;
    mix.comp[2].lo = xi;
    mix.comp[2].hi = zeta;
    mix.comp[2].logw = xi < zeta ? -lambda * (zeta - xi) +
                                       log_norm_interval((xi - ystar) * sr_w, (zeta - ystar) * sr_w)
                                 : -std::numeric_limits<double>::infinity();
  }
  double m = -std::numeric_limits<double>::infinity();
  for (int c = 0; c < mix.k; ++c) m = std::max(m, mix.comp[c].logw);
  double z = 0.0;
  for (int c = 0; c < mix.k; ++c) z += std::exp(mix.comp[c].logw - m);
  const double norm = m + std::log(z);
  for (int c = 0; c < mix.k; ++c) mix.comp[c].logw -= norm;
  return mix;
}

// Per-dyad latent state. `lambda` mirrors the sampler's current global value
// so sweeps can read it without extra plumbing.
struct AugmentedState {
  std::array<ThetaPath, 3> paths;
  std::array<std::vector<double>, 3> omega;  // length T
  std::array<std::vector<double>, 3> tau2;   // length T (FFBS scheme)
  double lambda = 1.0;
  std::vector<double> scratch;  // pseudo-observation buffer
};

namespace mcmc_detail {

// Joint FFBS redraw of coordinate r from its populated omega/tau2; the
// pseudo-observations are formed at the current values of the other two
// coordinates.
inline void ffbs_coord(AugmentedState& st, const DyadSeries& obs, int r, Rng& rng) {
  const int T = obs.T();
  ThetaPath& path = st.paths[static_cast<std::size_t>(r) - 1];
  const std::vector<double>& om = st.omega[static_cast<std::size_t>(r) - 1];
  st.scratch.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const ThetaTriple cur{st.paths[0][t], st.paths[1][t], st.paths[2][t]};
    st.scratch[static_cast<std::size_t>(t) - 1] =
        pseudo_obs(cur, r, obs.cat(t), om[static_cast<std::size_t>(t) - 1]);
  }
  std::vector<double> draw;
  ffbs_draw_into(path.theta0(), st.scratch, om, st.tau2[static_cast<std::size_t>(r) - 1], rng,
                 draw);
  for (int t = 1; t <= T; ++t) path.set(t, draw[static_cast<std::size_t>(t) - 1]);
}

// Single-site pass over coordinate r using the truncated-normal mixture
// conditionals; neighbors update in place as the pass advances.
inline void direct_coord(AugmentedState& st, const DyadSeries& obs, int r, Rng& rng) {
  const int T = obs.T();
  ThetaPath& path = st.paths[static_cast<std::size_t>(r) - 1];
  const std::vector<double>& om = st.omega[static_cast<std::size_t>(r) - 1];
  st.scratch.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) {
    const ThetaTriple cur{st.paths[0][t], st.paths[1][t], st.paths[2][t]};
    st.scratch[static_cast<std::size_t>(t) - 1] =
        pseudo_obs(cur, r, obs.cat(t), om[static_cast<std::size_t>(t) - 1]);
  }
  for (int t = 1; t <= T; ++t) {
    const double w = om[static_cast<std::size_t>(t) - 1];
    const double ys = st.scratch[static_cast<std::size_t>(t) - 1];
    const TnMixture mix =
        t < T ? direct_conditional(ys, w, st.lambda, path[t - 1], path[t + 1])
              : direct_conditional(ys, w, st.lambda, path[t - 1]);
    path.set(t, mix.sample(rng));
  }
}

}  // namespace mcmc_detail

// Redraw all three paths by FFBS from already-populated omega and tau2.
inline void ffbs_sweep(AugmentedState& st, const DyadSeries& obs, Rng& rng) {
  for (int r = 1; r <= 3; ++r) mcmc_detail::ffbs_coord(st, obs, r, rng);
}

// Redraw all three paths sitewise from already-populated omega; the penalty
// rate is read from st.lambda.
inline void direct_sweep(AugmentedState& st, const DyadSeries& obs, Rng& rng) {
  for (int r = 1; r <= 3; ++r) mcmc_detail::direct_coord(st, obs, r, rng);
}

// Conjugate update: each of the n_diffs increments contributes one factor
// (lambda/2) exp(-lambda |diff|), so lambda | paths ~ Gamma(a + n_diffs,
// b + sum |diff|).
inline double sample_lambda_given(double sum_abs_diff, std::uint64_t n_diffs, double a, double b,
                                  Rng& rng) {
  return rng.gamma(a + static_cast<double>(n_diffs), b + sum_abs_diff);
}

inline std::pair<double, std::uint64_t> path_abs_diffs(const std::array<ThetaPath, 3>& paths) {
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const ThetaPath& p : paths) {
    for (int t = 1; t <= p.T(); ++t) sum += std::fabs(p[t] - p[t - 1]);
    count += static_cast<std::uint64_t>(p.T());
  }
  return {sum, count};
}

inline double sample_lambda(const std::vector<AugmentedState>& states, double a, double b,
                            Rng& rng) {
  double sum = 0.0;
  std::uint64_t count = 0;
  for (const AugmentedState& st : states) {
    const auto [s, c] = path_abs_diffs(st.paths);
    sum += s;
    count += c;
  }
  return sample_lambda_given(sum, count, a, b, rng);
}

// One Gibbs machine over all dyads of a series. Per cycle, every dyad runs
// (for r = 1,2,3): omega_r | theta, [tau2_r | theta_r, lambda], path_r |
// omega_r, rest; then lambda gets its global conjugate draw. Each dyad owns
// an RNG stream derived from (seed, dyad, step) and the lambda stream uses
// the one-past-the-last-dyad id, so any worker count gives identical chains.
// The Geweke hooks (prior_draw, resample_data) make the machine testable as a
// successive-conditional simulator.
class GibbsSampler {
 public:
  GibbsSampler(std::vector<DyadSeries> data, const ThetaTriple& theta0, const McmcConfig& cfg,
               const WorkerPool* pool = nullptr)
      : data_(std::move(data)), cfg_(cfg), pool_(pool) {
    cfg_.validate();
    if (data_.empty()) throw std::invalid_argument("GibbsSampler: no dyads");
    T_ = data_[0].T();
    if (T_ < 1) throw std::invalid_argument("GibbsSampler: need T >= 1");
    for (const DyadSeries& d : data_) {
      if (d.T() != T_) throw std::invalid_argument("GibbsSampler: dyads disagree on T");
    }
    lambda_ = cfg_.a / cfg_.b;  // prior mean as deterministic start
    st_.resize(data_.size());
    for (AugmentedState& st : st_) {
      for (int r = 0; r < 3; ++r) {
        st.paths[r] = ThetaPath(T_, theta0.get(r + 1));
        st.omega[r].assign(static_cast<std::size_t>(T_), 1.0);
        st.tau2[r].assign(static_cast<std::size_t>(T_), 1.0);
      }
      st.lambda = lambda_;
    }
    sums_.assign(data_.size(), 0.0);
  }

  int T() const { return T_; }
  std::size_t n_dyads() const { return data_.size(); }
  double lambda() const { return lambda_; }
  const AugmentedState& state(std::size_t d) const { return st_[d]; }
  const std::vector<DyadSeries>& data() const { return data_; }
  const McmcConfig& config() const { return cfg_; }

  // Draw (lambda, all paths) from the prior: lambda ~ Gamma(a, b), then
  // double-exponential random-walk paths at rate lambda.
  void prior_draw(Rng& rng) {
    lambda_ = rng.gamma(cfg_.a, cfg_.b);
    for (AugmentedState& st : st_) {
      st.lambda = lambda_;
      for (int r = 0; r < 3; ++r) {
        for (int t = 1; t <= T_; ++t) {
          st.paths[r].set(t, st.paths[r][t - 1] + rng.laplace(1.0 / lambda_));
        }
      }
    }
  }

  // Regenerate the observed categories from the current paths (successive-
  // conditional testing).
  void resample_data() {
    run_over_dyads([this](std::size_t d, Rng& rng) {
      AugmentedState& st = st_[d];
      for (int t = 1; t <= T_; ++t) {
        const ThetaTriple cur{st.paths[0][t], st.paths[1][t], st.paths[2][t]};
        data_[d].categories[static_cast<std::size_t>(t) - 1] =
            sample_category(category_probs(cur), rng);
      }
    });
    ++step_;
  }

  // One full Gibbs cycle.
  void scan() {
    run_over_dyads([this](std::size_t d, Rng& rng) {
      AugmentedState& st = st_[d];
      st.lambda = lambda_;
      const DyadSeries& obs = data_[d];
      for (int r = 1; r <= 3; ++r) {
        std::vector<double>& om = st.omega[static_cast<std::size_t>(r) - 1];
        for (int t = 1; t <= T_; ++t) {
          const ThetaTriple cur{st.paths[0][t], st.paths[1][t], st.paths[2][t]};
          const double z = cur.get(r) + conditional_offset(cur, r);
          om[static_cast<std::size_t>(t) - 1] = sample_pg1(z, rng);
        }
        if (cfg_.scheme == McmcScheme::FFBS) {
          st.tau2[static_cast<std::size_t>(r) - 1] =
              sample_tau2(st.paths[static_cast<std::size_t>(r) - 1], lambda_, rng);
          mcmc_detail::ffbs_coord(st, obs, r, rng);
        } else {
          mcmc_detail::direct_coord(st, obs, r, rng);
        }
      }
      sums_[d] = path_abs_diffs(st.paths).first;
    });
    double total = 0.0;
    for (double s : sums_) total += s;  // serial, index order: deterministic
    Rng lrng = Rng::derive(cfg_.seed, data_.size(), step_);
    lambda_ = sample_lambda_given(total, 3ULL * static_cast<std::uint64_t>(T_) * data_.size(),
                                  cfg_.a, cfg_.b, lrng);
    ++step_;
  }

 private:
  template <typename Fn>
  void run_over_dyads(const Fn& fn) {
    auto job = [&](std::size_t d) {
      Rng rng = Rng::derive(cfg_.seed, d, step_);
      fn(d, rng);
    };
    if (pool_ != nullptr) {
      pool_->run(data_.size(), job);
    } else {
      for (std::size_t d = 0; d < data_.size(); ++d) job(d);
    }
  }

  std::vector<DyadSeries> data_;
  McmcConfig cfg_;
  const WorkerPool* pool_ = nullptr;
  int T_ = 0;
  double lambda_ = 1.0;
  std::uint64_t step_ = 0;
  std::vector<AugmentedState> st_;
  std::vector<double> sums_;
};

struct MonitorEss {
  std::size_t dyad = 0;
  int r = 0;
  int t = 0;
  double ess = 0.0;
};

struct PosteriorDraws {
  int n = 0;
  int T = 0;
  std::size_t n_dyads = 0;
  int samples = 0;
  McmcScheme scheme = McmcScheme::FFBS;
  std::vector<double> lambda;            // one entry per retained draw
  std::vector<ThetaTriple> theta_last;   // [draw * n_dyads + dyad], theta at t = T
  std::vector<std::array<std::vector<double>, 3>> theta_mean;  // dyad -> r -> t = 0..T
  std::vector<int> mon_t;                // monitored times
  bool record_monitor = false;
  std::vector<double> mon;               // [draw][dyad][r][k], present when record_monitor
  std::vector<MonitorEss> mon_ess;
  double lambda_mean = 0.0;
  double lambda_ess = 0.0;
  double sampling_seconds = 0.0;

  std::size_t mon_width() const { return n_dyads * 3 * mon_t.size(); }

  std::vector<double> mon_chain(std::size_t dyad, int r, std::size_t k) const {
    std::vector<double> chain(static_cast<std::size_t>(samples));
    const std::size_t w = mon_width();
    const std::size_t off = (dyad * 3 + static_cast<std::size_t>(r - 1)) * mon_t.size() + k;
    for (int b = 0; b < samples; ++b) chain[static_cast<std::size_t>(b)] = mon[b * w + off];
    return chain;
  }
};

inline std::vector<int> default_monitor_times(int T) {
  std::vector<int> out;
  for (int cand : {T / 4, T / 2, T}) {
    const int t = cand < 1 ? 1 : cand;
    bool dup = false;
    for (int u : out) dup = dup || u == t;
    if (!dup) out.push_back(t);
  }
  return out;
}

inline PosteriorDraws run_mcmc(const NetworkSeries& series, const ThetaTriple& theta0,
                               const McmcConfig& cfg, const WorkerPool* pool = nullptr) {
  if (series.n() < 2 || series.T() < 1) {
    throw std::invalid_argument("run_mcmc: need n >= 2 and T >= 1");
  }
  cfg.validate();
  GibbsSampler sampler(extract_dyads(series), theta0, cfg, pool);

  PosteriorDraws out;
  out.n = series.n();
  out.T = series.T();
  out.n_dyads = sampler.n_dyads();
  out.samples = cfg.samples;
  out.scheme = cfg.scheme;
  out.record_monitor = cfg.record_monitor;
  out.mon_t = default_monitor_times(series.T());
  out.lambda.reserve(static_cast<std::size_t>(cfg.samples));
  out.theta_last.reserve(static_cast<std::size_t>(cfg.samples) * out.n_dyads);
  out.theta_mean.assign(out.n_dyads, {});
  for (auto& per_dyad : out.theta_mean) {
    for (int r = 0; r < 3; ++r) {
      per_dyad[r].assign(static_cast<std::size_t>(series.T()) + 1, 0.0);
    }
  }
  if (cfg.record_monitor) {
    out.mon.reserve(static_cast<std::size_t>(cfg.samples) * out.mon_width());
  }

  const auto start = std::chrono::steady_clock::now();
  const long total = static_cast<long>(cfg.burn_in) + static_cast<long>(cfg.samples) * cfg.thin;
  for (long it = 1; it <= total; ++it) {
    sampler.scan();
    const long k = it - cfg.burn_in;
    if (k < 1 || k % cfg.thin != 0) continue;
    out.lambda.push_back(sampler.lambda());
    for (std::size_t d = 0; d < out.n_dyads; ++d) {
      const AugmentedState& st = sampler.state(d);
      const int T = series.T();
      out.theta_last.push_back({st.paths[0][T], st.paths[1][T], st.paths[2][T]});
      for (int r = 0; r < 3; ++r) {
        auto& acc = out.theta_mean[d][r];
        const auto& vals = st.paths[r].values();
        for (std::size_t t = 0; t < vals.size(); ++t) acc[t] += vals[t];
      }
      if (cfg.record_monitor) {
        for (int r = 0; r < 3; ++r) {
          for (int t : out.mon_t) out.mon.push_back(st.paths[r][t]);
        }
      }
    }
  }
  out.sampling_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  for (auto& per_dyad : out.theta_mean) {
    for (int r = 0; r < 3; ++r) {
      for (double& x : per_dyad[r]) x /= static_cast<double>(cfg.samples);
    }
  }
  double lsum = 0.0;
  for (double l : out.lambda) lsum += l;
  out.lambda_mean = lsum / static_cast<double>(out.lambda.size());
  out.lambda_ess =
      cfg.samples >= 10 ? ess(out.lambda) : static_cast<double>(cfg.samples);
  if (cfg.record_monitor && cfg.samples >= 10) {
    for (std::size_t d = 0; d < out.n_dyads; ++d) {
      for (int r = 1; r <= 3; ++r) {
        for (std::size_t k = 0; k < out.mon_t.size(); ++k) {
          out.mon_ess.push_back({d, r, out.mon_t[k], ess(out.mon_chain(d, r, k))});
        }
      }
    }
  }
  return out;
}

}  // namespace netfuse
