#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "netfuse/mcmc.hpp"
#include "netfuse/network.hpp"
#include "netfuse/parallel.hpp"
#include "netfuse/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace netfuse;
using Catch::Approx;

namespace {
NetworkSeries random_net(int n, int T, Rng& rng, double p = 0.3) {
  NetworkSeries s(n, T);
  for (int t = 0; t < T; ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (i != j && rng.uniform() < p) s.set(t, i, j, true);
      }
    }
  }
  return s;
}
}  // namespace

TEST_CASE("conditional offsets make the coordinate logits exact") {
  // At the origin the first two offsets vanish and the reciprocity offset is
  // -log 3 (log-sum-exp of three unit weights).
  CHECK(conditional_offset({0.0, 0.0, 0.0}, 1) == Approx(0.0).margin(1e-15));
  CHECK(conditional_offset({0.0, 0.0, 0.0}, 2) == Approx(0.0).margin(1e-15));
  CHECK(conditional_offset({0.0, 0.0, 0.0}, 3) == Approx(-std::log(3.0)).epsilon(1e-14));

  // For random parameters, logistic(theta_r + C_r) equals the exact category
  // mass of the coordinate's response.
  Rng rng(61);
  for (int k = 0; k < 1000; ++k) {
    const ThetaTriple th{3.0 * rng.normal(), 3.0 * rng.normal(), 3.0 * rng.normal()};
    const CategoryProbs p = category_probs(th);
    CHECK(logistic(th.theta1 + conditional_offset(th, 1)) ==
          Approx(p.p10 + p.p11).margin(1e-12));
    CHECK(logistic(th.theta2 + conditional_offset(th, 2)) ==
          Approx(p.p01 + p.p11).margin(1e-12));
    CHECK(logistic(th.theta3 + conditional_offset(th, 3)) == Approx(p.p11).margin(1e-12));
  }
  CHECK_THROWS_AS(conditional_offset({0.0, 0.0, 0.0}, 4), std::out_of_range);
}

TEST_CASE("coordinate responses pick out the right link indicators") {
  CHECK(coord_response(DyadCategory::C10, 1) == 1);
  CHECK(coord_response(DyadCategory::C10, 2) == 0);
  CHECK(coord_response(DyadCategory::C10, 3) == 0);
  CHECK(coord_response(DyadCategory::C01, 2) == 1);
  CHECK(coord_response(DyadCategory::C11, 3) == 1);
  CHECK(coord_response(DyadCategory::C00, 1) == 0);
}

TEST_CASE("pseudo-observations follow the augmented-likelihood formula") {
  const ThetaTriple th{0.4, -0.7, 1.1};
  const double omega = 1.7;
  const double expect =
      (1.0 - 0.5) / omega - conditional_offset(th, 1);
  CHECK(pseudo_obs(th, 1, DyadCategory::C11, omega) == Approx(expect).epsilon(1e-14));
  CHECK(pseudo_obs(th, 3, DyadCategory::C10, omega) ==
        Approx(-0.5 / omega - conditional_offset(th, 3)).epsilon(1e-14));
  CHECK_THROWS_AS(pseudo_obs(th, 1, DyadCategory::C00, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(pseudo_obs(th, 1, DyadCategory::C00, -1.0), std::invalid_argument);
}

TEST_CASE("single-site smoother draw matches the conjugate posterior") {
  // T=1: prior N(theta0, tau2), likelihood precision omega at ystar; the
  // posterior is N((omega ystar + theta0/tau2)/(omega + 1/tau2), 1/(omega + 1/tau2)).
  const double theta0 = 0.6, ystar = 1.9, omega = 2.2, tau2 = 0.7;
  Rng rng(62);
  const int B = 60000;
  std::vector<double> draws(B);
  for (double& d : draws) {
    d = ffbs_draw(theta0, {ystar}, {omega}, {tau2}, rng)[0];
  }
  const double prec = omega + 1.0 / tau2;
  const double mean = (omega * ystar + theta0 / tau2) / prec;
  CHECK(testutil::mean_of(draws) == Approx(mean).margin(4.0 * std::sqrt(1.0 / prec / B)));
  CHECK(testutil::var_of(draws) == Approx(1.0 / prec).epsilon(0.05));
  CHECK(testutil::ks_test(draws, [&](double x) {
          return norm_cdf((x - mean) * std::sqrt(prec));
        }) > 0.01);
}

TEST_CASE("huge observation precision collapses the smoother onto the data") {
  Rng rng(63);
  const std::vector<double> ystar{1.0, -2.0, 0.5};
  const std::vector<double> omega(3, 1e12);
  const std::vector<double> tau2(3, 1.0);
  const std::vector<double> draw = ffbs_draw(0.0, ystar, omega, tau2, rng);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(draw[t] == Approx(ystar[t]).margin(1e-4));
  }
}

TEST_CASE("smoother draws match the dense tridiagonal posterior") {
  Rng rng(64);
  const int T = 3;
  std::vector<double> ystar(T), omega(T), tau2(T);
  for (int t = 0; t < T; ++t) {
    ystar[static_cast<std::size_t>(t)] = rng.normal();
    omega[static_cast<std::size_t>(t)] = 0.3 + 2.0 * rng.uniform();
    tau2[static_cast<std::size_t>(t)] = 0.2 + rng.uniform();
  }
  const double theta0 = 0.4;
  const oracles::DensePosterior post = oracles::dense_state_posterior(theta0, ystar, omega, tau2);

  const int B = 40000;
  std::vector<std::vector<double>> draws(static_cast<std::size_t>(T),
                                         std::vector<double>(static_cast<std::size_t>(B)));
  std::vector<double> buf;
  for (int b = 0; b < B; ++b) {
    ffbs_draw_into(theta0, ystar, omega, tau2, rng, buf);
    for (int t = 0; t < T; ++t) draws[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] = buf[static_cast<std::size_t>(t)];
  }
  for (int t = 0; t < T; ++t) {
    const double se = std::sqrt(post.cov[static_cast<std::size_t>(t) * T + static_cast<std::size_t>(t)] / B);
    CHECK(testutil::mean_of(draws[static_cast<std::size_t>(t)]) ==
          Approx(post.mean[static_cast<std::size_t>(t)]).margin(4.0 * se));
  }
  // Covariance entries, including the off-diagonal smoothing correlation.
  for (int s = 0; s < T; ++s) {
    for (int t = s; t < T; ++t) {
      double acc = 0.0;
      const double ms = testutil::mean_of(draws[static_cast<std::size_t>(s)]);
      const double mt = testutil::mean_of(draws[static_cast<std::size_t>(t)]);
      for (int b = 0; b < B; ++b) {
        acc += (draws[static_cast<std::size_t>(s)][static_cast<std::size_t>(b)] - ms) *
               (draws[static_cast<std::size_t>(t)][static_cast<std::size_t>(b)] - mt);
      }
      acc /= B - 1;
      const double css = post.cov[static_cast<std::size_t>(s) * T + static_cast<std::size_t>(s)];
      const double ctt = post.cov[static_cast<std::size_t>(t) * T + static_cast<std::size_t>(t)];
      const double cst = post.cov[static_cast<std::size_t>(s) * T + static_cast<std::size_t>(t)];
      const double se = std::sqrt((css * ctt + cst * cst) / B);
      CHECK(acc == Approx(cst).margin(5.0 * se));
    }
  }
  CHECK_THROWS_AS(ffbs_draw(0.0, ystar, omega, {1.0}, rng), std::invalid_argument);
}

TEST_CASE("innovation-variance updates have the right inverse mean") {
  // 1/tau2 ~ InverseGaussian(lambda/|delta|, lambda^2) so E[1/tau2] = lambda/|delta|.
  Rng rng(65);
  const double lambda = 2.5, delta = 0.8;
  ThetaPath path(1, 0.0);
  path.set(1, delta);
  const int B = 60000;
  std::vector<double> inv(B);
  for (int b = 0; b < B; ++b) {
    inv[static_cast<std::size_t>(b)] = 1.0 / sample_tau2(path, lambda, rng)[0];
  }
  CHECK(testutil::mean_of(inv) == Approx(lambda / delta).epsilon(0.02));
  CHECK(testutil::ks_test(inv, [&](double x) {
          return testutil::inverse_gaussian_cdf(x, lambda / delta, lambda * lambda);
        }) > 0.01);
  // Zero difference is floored, not a division by zero.
  ThetaPath flat(1, 0.3);
  flat.set(1, 0.3);
  const double t2 = sample_tau2(flat, lambda, rng)[0];
  CHECK(std::isfinite(t2));
  CHECK(t2 > 0.0);
  CHECK_THROWS_AS(sample_tau2(path, 0.0, rng), std::invalid_argument);
}

TEST_CASE("mixing normals over exponential variances recovers the double exponential") {
  // If tau2 ~ Exp(lambda^2/2) and delta | tau2 ~ N(0, tau2), then delta is
  // Laplace with scale 1/lambda; this is the augmentation the variance update
  // inverts.
  Rng rng(66);
  const double lambda = 1.7;
  const int B = 20000;
  std::vector<double> delta(B);
  for (double& d : delta) {
    const double t2 = rng.exponential(lambda * lambda / 2.0);
    d = std::sqrt(t2) * rng.normal();
  }
  CHECK(testutil::ks_test(delta, [&](double x) {
          return testutil::laplace_cdf(x, 0.0, 1.0 / lambda);
        }) > 0.01);
}

TEST_CASE("direct site conditional reduces to a plain normal at zero penalty") {
  const TnMixture mix = direct_conditional(0.7, 4.0, 0.0, -0.3, 1.2);
  for (double x : {-1.0, 0.0, 0.7, 2.0}) {
    CHECK(mix.pdf(x) == Approx(2.0 / std::sqrt(2.0 * kPi) *
                               std::exp(-2.0 * (x - 0.7) * (x - 0.7))).margin(1e-10));
  }
}

TEST_CASE("direct site conditional matches the quadrature-normalized target") {
  Rng rng(67);
  for (int rep = 0; rep < 25; ++rep) {
    const double ystar = 2.0 * rng.normal();
    const double omega = 0.1 + 4.0 * rng.uniform();
    const double lambda = 8.0 * rng.uniform();
    const double a = 2.0 * rng.normal(), c = 2.0 * rng.normal();
    const bool interior = rep % 2 == 0;
    const std::optional<double> right =
        interior ? std::optional<double>(c) : std::nullopt;
    const TnMixture mix = direct_conditional(ystar, omega, lambda, a, right);

    auto log_target = [&](double x) {
      double e = -0.5 * omega * (x - ystar) * (x - ystar) - lambda * std::fabs(x - a);
      if (interior) e -= lambda * std::fabs(x - c);
      return e;
    };
    const double sd = 1.0 / std::sqrt(omega);
    double lo = std::min(std::min(a, interior ? c : a), ystar - 2.0 * lambda / omega) - 14.0 * sd;
    double hi = std::max(std::max(a, interior ? c : a), ystar + 2.0 * lambda / omega) + 14.0 * sd;
    // The target can be a spike a few decay lengths wide inside a window
    // hundreds of units across, which single-shot adaptive quadrature can
    // mistake for zero. Locate the effective support on a dense grid, then
    // integrate piecewise between the kinks.
    const int N = 8000;
    const double step = (hi - lo) / N;
    double peak = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= N; ++k) peak = std::max(peak, log_target(lo + step * k));
    double wlo = hi, whi = lo;
    for (int k = 0; k <= N; ++k) {
      const double x = lo + step * k;
      if (log_target(x) >= peak - 45.0) {
        wlo = std::min(wlo, x);
        whi = std::max(whi, x);
      }
    }
    wlo = std::max(lo, wlo - step);
    whi = std::min(hi, whi + step);
    std::vector<double> cuts{wlo, whi};
    for (double kx : {a, interior ? c : a, ystar}) {
      if (kx > wlo && kx < whi) cuts.push_back(kx);
    }
    std::sort(cuts.begin(), cuts.end());
    auto shifted = [&](double x) { return std::exp(log_target(x) - peak); };
    double Z = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      Z += testutil::integrate(shifted, cuts[s], cuts[s + 1], 1e-13);
    }
    REQUIRE(Z > 0.0);
    for (int k = 0; k <= 24; ++k) {
      const double x = lo + (hi - lo) * k / 24.0;
      INFO("rep " << rep << " x = " << x);
      CHECK(std::fabs(mix.pdf(x) - shifted(x) / Z) <= 1e-8 * std::max(1.0, 1.0 / sd));
    }
    // The mixture is itself normalized; its kinks sit on the same cuts.
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
      total += testutil::integrate([&](double x) { return mix.pdf(x); }, cuts[s], cuts[s + 1],
                                   1e-12);
    }
    CHECK(total == Approx(1.0).margin(1e-6));
  }
  CHECK_THROWS_AS(direct_conditional(0.0, 0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(direct_conditional(0.0, 1.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("equal neighbors collapse the middle mixture component") {
  const TnMixture mix = direct_conditional(0.2, 1.0, 2.0, 0.5, 0.5);
  REQUIRE(mix.k == 3);
  CHECK(mix.comp[2].logw == -std::numeric_limits<double>::infinity());
  const double w0 = std::exp(mix.comp[0].logw), w1 = std::exp(mix.comp[1].logw);
  CHECK(w0 + w1 == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("direct conditional sampling matches its own density's mean") {
  Rng rng(68);
  const TnMixture mix = direct_conditional(0.4, 1.3, 2.2, -0.6, 0.9);
  const int B = 200000;
  std::vector<double> x(B);
  for (double& v : x) v = mix.sample(rng);
  // t * pdf(t) vanishes at 0 and in both tails, so a single quadrature pass
  // can mistake it for the zero function; integrate between the density's own
  // breakpoints (truncation bounds, the origin, the gaussian center).
  const std::array<double, 6> cuts{-8.0, -0.6, 0.0, 0.4, 0.9, 8.0};
  double pdf_mean = 0.0;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    pdf_mean += testutil::integrate([&](double t) { return t * mix.pdf(t); }, cuts[s],
                                    cuts[s + 1], 1e-12);
  }
  CHECK(testutil::mean_of(x) == Approx(pdf_mean).margin(0.01));
}

TEST_CASE("penalty-rate update draws from the right gamma posterior") {
  Rng rng(69);
  const double a = 1.0, b = 0.2, sum = 3.7;
  const std::uint64_t n_diffs = 240;
  const int B = 60000;
  std::vector<double> lam(B);
  for (double& v : lam) v = sample_lambda_given(sum, n_diffs, a, b, rng);
  const double shape = a + static_cast<double>(n_diffs), rate = b + sum;
  CHECK(testutil::mean_of(lam) == Approx(shape / rate).epsilon(0.01));
  CHECK(testutil::var_of(lam) == Approx(shape / (rate * rate)).epsilon(0.05));

  std::array<ThetaPath, 3> paths{ThetaPath(2, 0.0), ThetaPath(2, 0.0), ThetaPath(2, 0.0)};
  paths[0].set(1, 1.5);  // |1.5| + |-1.5| on path 0, zeros elsewhere
  const auto [s, n] = path_abs_diffs(paths);
  CHECK(s == Approx(3.0));
  CHECK(n == 6);
}

TEST_CASE("gibbs scans are bitwise deterministic and pool-invariant") {
  Rng rng(70);
  const NetworkSeries net = random_net(4, 5, rng);
  const auto dyads = extract_dyads(net);
  McmcConfig cfg;
  cfg.seed = 99;
  for (McmcScheme scheme : {McmcScheme::FFBS, McmcScheme::Direct}) {
    cfg.scheme = scheme;
    GibbsSampler g1(dyads, {0.0, 0.0, 0.0}, cfg);
    GibbsSampler g2(dyads, {0.0, 0.0, 0.0}, cfg);
    WorkerPool pool(3);
    GibbsSampler g3(dyads, {0.0, 0.0, 0.0}, cfg, &pool);
    for (int it = 0; it < 25; ++it) {
      g1.scan();
      g2.scan();
      g3.scan();
    }
    CHECK(g1.lambda() == g2.lambda());
    CHECK(g1.lambda() == g3.lambda());
    bool equal = true;
    for (std::size_t d = 0; d < dyads.size(); ++d) {
      for (int r = 0; r < 3; ++r) {
        for (int t = 1; t <= 5; ++t) {
          equal = equal && g1.state(d).paths[static_cast<std::size_t>(r)][t] ==
                               g3.state(d).paths[static_cast<std::size_t>(r)][t];
        }
      }
    }
    CHECK(equal);
  }
  // The two schemes traverse different randomness.
  McmcConfig cf, cd;
  cf.scheme = McmcScheme::FFBS;
  cd.scheme = McmcScheme::Direct;
  cf.seed = cd.seed = 7;
  GibbsSampler gf(dyads, {0.0, 0.0, 0.0}, cf);
  GibbsSampler gd(dyads, {0.0, 0.0, 0.0}, cd);
  for (int it = 0; it < 5; ++it) {
    gf.scan();
    gd.scan();
  }
  CHECK(gf.state(0).paths[0][1] != gd.state(0).paths[0][1]);
}

TEST_CASE("prior draws have the declared penalty and increment laws") {
  McmcConfig cfg;
  cfg.a = 4.0;
  cfg.b = 2.0;
  Rng rng(71);

  DyadSeries small;
  small.i = 0;
  small.j = 1;
  small.categories.assign(10, DyadCategory::C00);
  GibbsSampler g({small}, {0.0, 0.0, 0.0}, cfg);
  std::vector<double> lams(4000);
  for (double& v : lams) {
    g.prior_draw(rng);
    v = g.lambda();
  }
  CHECK(testutil::mean_of(lams) == Approx(cfg.a / cfg.b).epsilon(0.03));
  CHECK(testutil::var_of(lams) == Approx(cfg.a / (cfg.b * cfg.b)).epsilon(0.10));

  // Conditional on the drawn lambda, increments are double exponential.
  DyadSeries big;
  big.i = 0;
  big.j = 1;
  big.categories.assign(1500, DyadCategory::C00);
  GibbsSampler gl({big}, {0.0, 0.0, 0.0}, cfg);
  gl.prior_draw(rng);
  const double lam = gl.lambda();
  std::vector<double> incs;
  for (int r = 0; r < 3; ++r) {
    for (int t = 1; t <= gl.T(); ++t) {
      incs.push_back(gl.state(0).paths[static_cast<std::size_t>(r)][t] -
                     gl.state(0).paths[static_cast<std::size_t>(r)][t - 1]);
    }
  }
  CHECK(testutil::ks_test(incs, [&](double x) {
          return testutil::laplace_cdf(x, 0.0, 1.0 / lam);
        }) > 0.01);
}

TEST_CASE("data regeneration is reproducible and advances the stream") {
  Rng rng(72);
  const NetworkSeries net = random_net(3, 4, rng);
  const auto dyads = extract_dyads(net);
  McmcConfig cfg;
  cfg.seed = 5;
  GibbsSampler g1(dyads, {0.0, 0.0, 0.0}, cfg);
  GibbsSampler g2(dyads, {0.0, 0.0, 0.0}, cfg);
  g1.resample_data();
  g2.resample_data();
  CHECK(g1.data()[0].categories == g2.data()[0].categories);
  const auto snapshot = g1.data()[0].categories;
  g1.resample_data();
  // A second regeneration uses a fresh substream (usually differing).
  bool changed = false;
  for (int rep = 0; rep < 5 && !changed; ++rep) {
    changed = g1.data()[0].categories != snapshot;
    if (!changed) g1.resample_data();
  }
  CHECK(changed);
}

TEST_CASE("posterior runs expose consistent shapes and summaries") {
  Rng rng(73);
  const NetworkSeries net = random_net(3, 4, rng);
  McmcConfig cfg;
  cfg.burn_in = 50;
  cfg.samples = 200;
  cfg.seed = 11;
  const PosteriorDraws out = run_mcmc(net, {0.0, 0.0, 0.0}, cfg);
  CHECK(out.n == 3);
  CHECK(out.T == 4);
  CHECK(out.n_dyads == 3);
  CHECK(out.samples == 200);
  CHECK(out.lambda.size() == 200);
  CHECK(out.theta_last.size() == 200 * 3);
  REQUIRE(out.theta_mean.size() == 3);
  REQUIRE(out.theta_mean[0][0].size() == 5);  // t = 0..T
  CHECK(out.mon_t == std::vector<int>{1, 2, 4});
  CHECK(out.lambda_ess <= 200.0);
  CHECK(out.lambda_mean > 0.0);

  // theta_mean at t = T is the same average that theta_last carries.
  for (std::size_t d = 0; d < 3; ++d) {
    double acc = 0.0;
    for (int b = 0; b < 200; ++b) {
      acc += out.theta_last[static_cast<std::size_t>(b) * 3 + d].theta1;
    }
    CHECK(out.theta_mean[d][0][4] == Approx(acc / 200.0).epsilon(1e-12));
  }

  // Monitor chains are recorded per draw and match the ESS table shape.
  REQUIRE(out.record_monitor);
  CHECK(out.mon.size() == static_cast<std::size_t>(200) * 3 * 3 * out.mon_t.size());
  CHECK(out.mon_ess.size() == 3 * 3 * out.mon_t.size());
  const std::vector<double> chain = out.mon_chain(1, 2, 0);
  CHECK(chain.size() == 200);

  // Determinism including across pool sizes.
  WorkerPool pool(4);
  const PosteriorDraws out2 = run_mcmc(net, {0.0, 0.0, 0.0}, cfg, &pool);
  CHECK(out2.lambda == out.lambda);
  bool same = true;
  for (std::size_t k = 0; k < out.theta_last.size(); ++k) {
    same = same && out.theta_last[k].theta1 == out2.theta_last[k].theta1 &&
           out.theta_last[k].theta3 == out2.theta_last[k].theta3;
  }
  CHECK(same);

  // Thinning keeps every `thin`-th post-burn-in scan.
  McmcConfig thin = cfg;
  thin.samples = 100;
  thin.thin = 2;
  const PosteriorDraws out3 = run_mcmc(net, {0.0, 0.0, 0.0}, thin);
  CHECK(out3.lambda.size() == 100);
}

TEST_CASE("the two augmentation schemes agree on posterior means") {
  // Both kernels target the same posterior (each passes the prior-recovery
  // test above); here we only need ergodic averages to meet. Under strong
  // fusion the single-site scheme crosses between fused configurations at
  // rate ~ exp(-2 lambda gap), so agreement is only checkable in finite time
  // at a moderate penalty; an overwhelming gamma prior pins lambda ~= 1.5 for
  // both runs, which also removes the lambda <-> path-roughness feedback.
  // Margins are sized from the chains' own effective sample sizes.
  Rng rng(74);
  const NetworkSeries net = random_net(2, 6, rng, 0.4);
  McmcConfig cf;
  cf.burn_in = 1000;
  cf.samples = 4000;
  cf.thin = 2;
  cf.a = 1.5e6;
  cf.b = 1.0e6;
  cf.seed = 3;
  cf.scheme = McmcScheme::FFBS;
  McmcConfig cd = cf;
  cd.scheme = McmcScheme::Direct;
  cd.burn_in = 2000;
  cd.thin = 25;
  const PosteriorDraws a = run_mcmc(net, {0.0, 0.0, 0.0}, cf);
  const PosteriorDraws b = run_mcmc(net, {0.0, 0.0, 0.0}, cd);

  auto se_of = [](const std::vector<double>& chain, double n_eff) {
    return std::sqrt(testutil::var_of(chain) / std::max(10.0, n_eff));
  };
  const double lam_a = se_of(a.lambda, a.lambda_ess);
  const double lam_b = se_of(b.lambda, b.lambda_ess);
  CHECK(a.lambda_mean ==
        Approx(b.lambda_mean).margin(5.0 * std::sqrt(lam_a * lam_a + lam_b * lam_b) + 0.02));

  REQUIRE(a.mon_t == b.mon_t);
  for (int r = 1; r <= 3; ++r) {
    for (std::size_t k = 0; k < a.mon_t.size(); ++k) {
      const std::vector<double> ca = a.mon_chain(0, r, k);
      const std::vector<double> cb = b.mon_chain(0, r, k);
      const double sa = se_of(ca, ess(ca));
      const double sb = se_of(cb, ess(cb));
      INFO("r = " << r << " t = " << a.mon_t[k]);
      CHECK(testutil::mean_of(ca) ==
            Approx(testutil::mean_of(cb)).margin(5.0 * std::sqrt(sa * sa + sb * sb) + 0.02));
    }
  }

  // Coarse whole-path agreement at every time point.
  for (int r = 0; r < 3; ++r) {
    for (int t = 1; t <= 6; ++t) {
      CHECK(a.theta_mean[0][static_cast<std::size_t>(r)][static_cast<std::size_t>(t)] ==
            Approx(b.theta_mean[0][static_cast<std::size_t>(r)][static_cast<std::size_t>(t)])
                .margin(0.15));
    }
  }
}

TEST_CASE("sampler configuration rejects invalid values") {
  McmcConfig cfg;
  cfg.samples = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McmcConfig{};
  cfg.burn_in = -1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McmcConfig{};
  cfg.thin = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McmcConfig{};
  cfg.a = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = McmcConfig{};
  cfg.b = -0.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

  GibbsSampler* never = nullptr;
  (void)never;
  CHECK_THROWS_AS(GibbsSampler({}, {0.0, 0.0, 0.0}, McmcConfig{}), std::invalid_argument);
}

TEST_CASE("monitor time defaults cover quartile, half, and endpoint") {
  CHECK(default_monitor_times(100) == std::vector<int>{25, 50, 100});
  CHECK(default_monitor_times(4) == std::vector<int>{1, 2, 4});
  CHECK(default_monitor_times(1) == std::vector<int>{1});
  CHECK(default_monitor_times(3) == std::vector<int>{1, 3});
}
