#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "netfuse/dyad_model.hpp"
#include "netfuse/network.hpp"
#include "netfuse/parallel.hpp"
#include "netfuse/rng.hpp"

// Synthetic network generators: double-exponential random-walk paths per
// dyad, optionally with one deterministic level shift (a structural break).
// Generators are pure functions of the spec; every dyad draws from its own
// derived RNG stream, so output is identical for any worker count.

namespace netfuse {

struct SimSpec {
  int n = 2;
  int T = 1;
  double lambda_true = 12.0;
  ThetaTriple theta0{};
  int break_time = 0;  // 0 = no break; otherwise 1 < break_time <= T
  ThetaTriple theta_shift{};
  std::uint64_t seed = 1;

  void validate() const {
    if (n < 2) throw std::invalid_argument("SimSpec: need n >= 2");
    if (T < 1) throw std::invalid_argument("SimSpec: need T >= 1");
    if (!(lambda_true > 0.0)) throw std::invalid_argument("SimSpec: lambda_true must be > 0");
    if (!theta0.finite() || !theta_shift.finite()) {
      throw std::invalid_argument("SimSpec: non-finite theta");
    }
    if (break_time != 0 && (break_time <= 1 || break_time > T)) {
      throw std::invalid_argument("SimSpec: break_time must satisfy 1 < break_time <= T");
    }
  }
};

struct SimResult {
  NetworkSeries series;
  // truth[dyad][r][t], t = 0..T, dyads in canonical (i<j) order.
  std::vector<std::array<std::vector<double>, 3>> truth;
};

namespace sim_detail {

inline SimResult run_sim(const SimSpec& spec, const WorkerPool* pool) {
  const std::size_t D = dyad_count(spec.n);
  SimResult out;
  out.series = NetworkSeries(spec.n, spec.T);
  out.truth.assign(D, {});

  std::vector<std::vector<DyadCategory>> cats(D);
  auto job = [&](std::size_t k) {
    Rng rng = Rng::derive(spec.seed, k, 0);
    auto& paths = out.truth[k];
    for (int r = 0; r < 3; ++r) {
      paths[r].assign(static_cast<std::size_t>(spec.T) + 1, 0.0);
      paths[r][0] = spec.theta0.get(r + 1);
    }
    auto& cat = cats[k];
    cat.resize(static_cast<std::size_t>(spec.T));
    ThetaTriple th = spec.theta0;
    for (int t = 1; t <= spec.T; ++t) {
      if (t == spec.break_time) {
        th.theta1 += spec.theta_shift.theta1;
        th.theta2 += spec.theta_shift.theta2;
        th.theta3 += spec.theta_shift.theta3;
      }
      th.theta1 += rng.laplace(1.0 / spec.lambda_true);
      th.theta2 += rng.laplace(1.0 / spec.lambda_true);
      th.theta3 += rng.laplace(1.0 / spec.lambda_true);
      for (int r = 0; r < 3; ++r) paths[r][static_cast<std::size_t>(t)] = th.get(r + 1);
      cat[static_cast<std::size_t>(t) - 1] = sample_category(category_probs(th), rng);
    }
  };
  if (pool != nullptr) {
    pool->run(D, job);
  } else {
    for (std::size_t k = 0; k < D; ++k) job(k);
  }

  std::size_t k = 0;
  for (int i = 0; i < spec.n; ++i) {
    for (int j = i + 1; j < spec.n; ++j, ++k) {
      for (int t = 0; t < spec.T; ++t) {
        const DyadCategory c = cats[k][static_cast<std::size_t>(t)];
        if (y_first(c)) out.series.set(t, i, j, true);
        if (y_second(c)) out.series.set(t, j, i, true);
      }
    }
  }
  return out;
}

}  // namespace sim_detail

// Pure random-walk paths (no structural break).
inline SimResult simulate_de_walk(const SimSpec& spec, const WorkerPool* pool = nullptr) {
  spec.validate();
  if (spec.break_time != 0) {
    throw std::invalid_argument("simulate_de_walk: spec must not set break_time");
  }
  return sim_detail::run_sim(spec, pool);
}

// Random-walk paths with a deterministic level shift applied to every dyad
// at t = break_time (before that step's innovation).
inline SimResult simulate_break(const SimSpec& spec, const WorkerPool* pool = nullptr) {
  spec.validate();
  if (spec.break_time == 0) {
    throw std::invalid_argument("simulate_break: spec must set break_time");
  }
  return sim_detail::run_sim(spec, pool);
}

// Dense-regime preset: symmetric start at zero, moderate innovation rate.
inline SimSpec sim1_spec(std::uint64_t seed = 1) {
  SimSpec s;
  s.n = 71;
  s.T = 201;
  s.lambda_true = 12.0;
  s.theta0 = {0.0, 0.0, 0.0};
  s.seed = seed;
  return s;
}

// Sparse-regime preset with positive reciprocity and a level shift at t=85.
inline SimSpec sim2_spec(std::uint64_t seed = 1) {
  SimSpec s;
  s.n = 71;
  s.T = 201;
  s.lambda_true = 12.0;
  s.theta0 = {-2.2, -2.2, 2.0};
  s.break_time = 85;
  s.theta_shift = {0.6, 0.6, 0.5};
  s.seed = seed;
  return s;
}

}  // namespace netfuse
