#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hobz/inference.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/sampler.hpp"
#include "oracles.hpp"

using namespace hobz;

namespace {

Dataset mixed_dataset(std::size_t n, std::size_t p, std::uint64_t seed,
                      double p_one = 0.25, double p_zero = 0.25) {
  Rng rng(seed);
  Matrix x(n, p);
  for (double& v : x.data) v = rng.normal();
  std::vector<double> y(n);
  for (auto& v : y) {
    const double u = rng.uniform();
    v = u < p_one ? 1.0 : u < p_one + p_zero ? 0.0 : 0.02 + 0.96 * rng.uniform();
  }
  return Dataset::from_xy(std::move(x), std::move(y));
}

void check_phi_signs(const SamplerState& st, const Dataset& data) {
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    if (data.is_one[i]) {
      CHECK(st.phi1[i] > 0.0);
    } else {
      CHECK(st.phi1[i] < 0.0);
      if (data.is_zero[i]) {
        CHECK(st.phi0[i] > 0.0);
      } else {
        CHECK(st.phi0[i] < 0.0);
      }
    }
  }
}

}  // namespace

TEST_CASE("sample_latent_phi: sign pattern and half-normal mean") {
  // All-ones response with f1 = 0: phi1 is half-normal.
  const std::size_t n = 200000;
  Matrix x(n, 1);
  const Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 3);
  sample_latent_phi(st, data);
  check_phi_signs(st, data);
  double s = 0;
  for (double v : st.phi1) s += v;
  const double target = std::sqrt(2.0 / M_PI);
  const double sd = std::sqrt(1.0 - target * target);
  CHECK(std::abs(s / double(n) - target) < 3.0 * sd / std::sqrt(double(n)));
}

TEST_CASE("sample_latent_phi: interior rows give strictly negative phi0") {
  const Dataset data = mixed_dataset(5000, 2, 5, 0.0, 0.0);  // all interior
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 7);
  sample_latent_phi(st, data);
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    CHECK(st.phi0[i] < 0.0);
    CHECK(st.phi1[i] < 0.0);
  }
}

TEST_CASE("sample_latent_phi: far fit f1 = +8 stays calibrated") {
  const std::size_t n = 100000;
  Matrix x(n, 1);
  const Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 11);
  std::fill(st.f1.begin(), st.f1.end(), 8.0);
  st.forest.trees[0].node(0).leaf.theta1 = 8.0;  // keep caches coherent
  sample_latent_phi(st, data);
  // Truncation barely binds: mean ~ 8, var ~ 1.
  double s = 0, ss = 0;
  for (double v : st.phi1) {
    REQUIRE(std::isfinite(v));
    s += v;
    ss += v * v;
  }
  const double m = s / double(n);
  CHECK(std::abs(m - 8.0) < 0.01);
  CHECK(std::abs(ss / double(n) - m * m - 1.0) < 0.02);
}

TEST_CASE("theta posterior parameters") {
  // Empty leaf: prior. N=1: N(r/2, 1/2) at sigma=1.
  auto [m0, v0] = theta_leaf_posterior(0, 0.0, 0.7);
  CHECK(m0 == 0.0);
  CHECK(v0 == doctest::Approx(0.49).epsilon(1e-12));
  auto [m1, v1] = theta_leaf_posterior(1, 0.8, 1.0);
  CHECK(m1 == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(v1 == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("lambda posterior parameters: frozen example") {
  LeafSuffStats st;
  st.n_beta = 2;
  st.s_eta_logy = std::log(0.5) + std::log(0.25);
  const Hyperparams h = Hyperparams::defaults(1);
  auto [shape, rate] = lambda_leaf_posterior(st, 2.0, h);
  CHECK(shape == doctest::Approx(4.5).epsilon(1e-12));
  CHECK(rate == doctest::Approx(0.15 + 2.0 * 2.0794415416798357).epsilon(1e-10));
}

TEST_CASE("update_theta_leaves: empty component falls back to the prior") {
  // All rows have y = 1, so the r=0 component never sees data.
  const std::size_t n = 50;
  Matrix x(n, 1);
  Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 17);
  const double sigma = st.h.sigma_theta0;
  double s = 0, ss = 0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    update_theta_leaves(st, data, 0, 0);
    const double th = st.forest.trees[0].node(0).leaf.theta0;
    s += th;
    ss += th * th;
  }
  const double m = s / reps;
  CHECK(std::abs(m) < 4.0 * sigma / std::sqrt(double(reps)));
  CHECK(ss / reps - m * m == doctest::Approx(sigma * sigma).epsilon(0.05));
}

TEST_CASE("update_theta_leaves: Gibbs draw matches the quadrature posterior (KS)") {
  const std::size_t n = 12;
  Matrix x(n, 1);
  Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 19);
  // Freeze phi at arbitrary values consistent with y = 1.
  Rng fix(23);
  for (std::size_t i = 0; i < n; ++i) st.phi1[i] = 0.2 + fix.uniform();
  const double sigma = st.h.sigma_theta1;

  // Quadrature posterior CDF on a grid.
  auto logpost = [&](double th) {
    double s = -0.5 * th * th / (sigma * sigma);
    for (std::size_t i = 0; i < n; ++i)
      s += -0.5 * (st.phi1[i] - th) * (st.phi1[i] - th);
    return s;
  };
  const int grid_n = 4001;
  const double lo = -2.0, hi = 3.0;
  std::vector<double> gx(grid_n), gcdf(grid_n);
  double acc = 0.0;
  std::vector<double> dens(grid_n);
  for (int g = 0; g < grid_n; ++g) {
    gx[g] = lo + (hi - lo) * g / (grid_n - 1);
    dens[g] = std::exp(logpost(gx[g]));
  }
  for (int g = 1; g < grid_n; ++g) {
    acc += 0.5 * (dens[g] + dens[g - 1]) * (gx[g] - gx[g - 1]);
    gcdf[g] = acc;
  }
  for (int g = 0; g < grid_n; ++g) gcdf[g] /= acc;
  auto cdf = [&](double v) {
    if (v <= lo) return 0.0;
    if (v >= hi) return 1.0;
    const double pos = (v - lo) / (hi - lo) * (grid_n - 1);
    const int g = static_cast<int>(pos);
    const double w = pos - g;
    return (1.0 - w) * gcdf[g] + w * gcdf[std::min(g + 1, grid_n - 1)];
  };

  std::vector<double> draws(10000);
  for (double& d : draws) {
    update_theta_leaves(st, data, 0, 1);
    d = st.forest.trees[0].node(0).leaf.theta1;
  }
  CHECK(oracle::ks_pvalue(draws, cdf) > 0.01);
}

TEST_CASE("update_lambda_leaves: empty interior falls back to the prior") {
  const std::size_t n = 40;
  Matrix x(n, 1);
  Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 29);
  double s = 0;
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    update_lambda_leaves(st, data, 0);
    s += st.forest.trees[0].node(0).leaf.lambda;
  }
  // Gamma(0.5, 0.15): mean 10/3, sd ~ 4.71.
  CHECK(std::abs(s / reps - 0.5 / 0.15) < 4.0 * 4.714 / std::sqrt(double(reps)));
}

TEST_CASE("update_lambda_leaves: stationary mean matches the quadrature posterior") {
  Rng gen(31);
  const std::size_t n = 60;
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (auto& v : y) {
    do {
      v = gen.beta(2.0 * 1.0, 2.0);  // kappa=2, lambda0=1
    } while (v <= 0.0 || v >= 1.0);
  }
  Dataset data = Dataset::from_xy(std::move(x), std::move(y));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 37);
  st.kappa = 2.0;

  // Quadrature mean of the approximate-likelihood posterior.
  double s_logy = 0.0;
  for (std::size_t i = 0; i < n; ++i) s_logy += data.log_y[i];
  auto logpost = [&](double t) {
    const double lam = std::exp(t);
    return (2.0 * double(n) + 0.5 - 1.0) * t - lam * (0.15 - 2.0 * s_logy) + t;
  };
  const double log_z = oracle::log_integrate_exp(logpost, -10.0, 5.0, 1e-12);
  const double log_m =
      oracle::log_integrate_exp([&](double t) { return logpost(t) + t; }, -10.0, 5.0,
                                1e-12);
  const double quad_mean = std::exp(log_m - log_z);

  double s = 0, ss = 0;
  const int reps = 20000;
  for (int r = 0; r < reps; ++r) {
    update_lambda_leaves(st, data, 0);
    const double lam = st.forest.trees[0].node(0).leaf.lambda;
    s += lam;
    ss += lam * lam;
  }
  const double m = s / reps;
  const double se = std::sqrt((ss / reps - m * m) / reps);
  CHECK(std::abs(m - quad_mean) < 2.0 * se + 1e-6);
}

TEST_CASE("update_kappa: prior fallback without interior rows") {
  const std::size_t n = 30;
  Matrix x(n, 1);
  Dataset data = Dataset::from_xy(std::move(x), std::vector<double>(n, 1.0));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 41);
  double s = 0;
  const int reps = 40000;
  for (int r = 0; r < reps; ++r) {
    update_kappa(st, data);
    s += st.kappa;
  }
  CHECK(std::abs(s / reps - 0.5) < 4.0 * 0.5 / std::sqrt(double(reps)));
}

TEST_CASE("update_kappa: recovers kappa_true = 5 with f_b fixed at 1") {
  Rng gen(43);
  const std::size_t n = 2000;
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (auto& v : y) {
    do {
      v = gen.beta(5.0, 5.0);
    } while (v <= 0.0 || v >= 1.0);
  }
  Dataset data = Dataset::from_xy(std::move(x), std::move(y));
  SamplerState st(data, Matrix{}, Hyperparams::defaults(1), 47);
  // log_fb stays 0: f_b = 1 throughout; only kappa moves.
  double post = 0.0;
  int kept = 0;
  for (int it = 0; it < 2000; ++it) {
    update_kappa(st, data);
    if (it >= 1000) {
      post += st.kappa;
      ++kept;
    }
  }
  const double mean = post / kept;
  CHECK(mean > 4.0);
  CHECK(mean < 6.0);
}

TEST_CASE("update_kappa: two initializations give overlapping IQRs") {
  Rng gen(53);
  const std::size_t n = 500;
  Matrix x(n, 1);
  std::vector<double> y(n);
  for (auto& v : y) {
    do {
      v = gen.beta(3.0, 3.0);
    } while (v <= 0.0 || v >= 1.0);
  }
  Dataset data = Dataset::from_xy(std::move(x), std::move(y));

  auto run = [&](double init, std::uint64_t seed) {
    SamplerState st(data, Matrix{}, Hyperparams::defaults(1), seed);
    st.kappa = init;
    std::vector<double> draws;
    for (int it = 0; it < 1200; ++it) {
      update_kappa(st, data);
      if (it >= 400) draws.push_back(st.kappa);
    }
    return std::pair{quantile(draws, 0.25), quantile(draws, 0.75)};
  };
  const auto [lo_a, hi_a] = run(0.1, 59);
  const auto [lo_b, hi_b] = run(50.0, 59);
  CHECK(lo_a < hi_b);
  CHECK(lo_b < hi_a);
}

TEST_CASE("mcmc_iteration: bitwise determinism") {
  const Dataset data = mixed_dataset(80, 3, 61);
  SamplerState a(data, Matrix{}, Hyperparams::defaults(20), 67);
  SamplerState b(data, Matrix{}, Hyperparams::defaults(20), 67);
  for (int it = 0; it < 5; ++it) {
    mcmc_iteration(a, data);
    mcmc_iteration(b, data);
  }
  CHECK(a.kappa == b.kappa);
  CHECK(a.f1 == b.f1);
  CHECK(a.f0 == b.f0);
  CHECK(a.log_fb == b.log_fb);
  CHECK(a.phi1 == b.phi1);
}

TEST_CASE("mcmc_iteration: n = 0 keeps stumps and does not crash") {
  const Dataset data = Dataset::from_xy(Matrix(0, 2), {});
  SamplerState st(data, Matrix{}, Hyperparams::defaults(10), 71);
  for (int it = 0; it < 20; ++it) mcmc_iteration(st, data);
  for (const Tree& t : st.forest.trees) {
    CHECK(t.is_stump());
    CHECK(std::isfinite(t.node(0).leaf.theta1));
    CHECK(t.node(0).leaf.lambda > 0.0);
  }
}

TEST_CASE("cache coherence and phi signs across iterations") {
  const Dataset data = mixed_dataset(120, 3, 73);
  Rng test_rng(74);
  Matrix test_x(30, 3);
  for (double& v : test_x.data) v = test_rng.normal();
  SamplerState st(data, test_x, Hyperparams::defaults(25), 79);
  for (int it = 0; it < 25; ++it) mcmc_iteration(st, data);
  check_phi_signs(st, data);

  SamplerState ref = st;
  recompute_caches(ref, data);
  auto close = [](double a, double b) {
    return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b));
  };
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    CHECK(close(st.f1[i], ref.f1[i]));
    CHECK(close(st.f0[i], ref.f0[i]));
    CHECK(close(st.log_fb[i], ref.log_fb[i]));
  }
  for (std::size_t j = 0; j < test_x.n_rows; ++j) {
    CHECK(close(st.f1_test[j], ref.f1_test[j]));
    CHECK(close(st.f0_test[j], ref.f0_test[j]));
    CHECK(close(st.log_fb_test[j], ref.log_fb_test[j]));
  }
  for (std::int32_t t = 0; t < st.h.num_trees; ++t) {
    CHECK(st.leaf_train[t] == ref.leaf_train[t]);
    CHECK(st.leaf_test[t] == ref.leaf_test[t]);
  }
}

TEST_CASE("run_chain: empty draw set when iterations == burn_in") {
  const Dataset data = mixed_dataset(40, 2, 83);
  Schedule sch;
  sch.iterations = 50;
  sch.burn_in = 50;
  sch.seed = 3;
  const PosteriorDraws d = run_chain(data, nullptr, Hyperparams::defaults(5), sch);
  CHECK(d.num_draws == 0);
  CHECK(d.n_train == 40);
  CHECK(d.kappa.empty());
  CHECK(d.iterations == 50);
}

TEST_CASE("run_chain: identical seeds give identical draws") {
  const Dataset data = mixed_dataset(60, 2, 89);
  Schedule sch;
  sch.iterations = 60;
  sch.burn_in = 30;
  sch.seed = 12345;
  const Hyperparams h = Hyperparams::defaults(10);
  const PosteriorDraws a = run_chain(data, nullptr, h, sch);
  const PosteriorDraws b = run_chain(data, nullptr, h, sch);
  CHECK(a.kappa == b.kappa);
  CHECK(a.f1_train == b.f1_train);
  CHECK(a.f0_train == b.f0_train);
  CHECK(a.fb_train == b.fb_train);
}

TEST_CASE("run_chain: null-signal data is probability calibrated") {
  // Constant generator: P(one) = 0.5, P(zero | <1) = 0.5, Beta(2, 2) interior.
  Rng gen(97);
  const std::size_t n = 600;
  Matrix x(n, 3);
  for (double& v : x.data) v = gen.normal();
  std::vector<double> y(n);
  for (auto& v : y) {
    if (gen.uniform() < 0.5) {
      v = 1.0;
    } else if (gen.uniform() < 0.5) {
      v = 0.0;
    } else {
      do {
        v = gen.beta(2.0, 2.0);
      } while (v <= 0.0 || v >= 1.0);
    }
  }
  const Dataset data = Dataset::from_xy(std::move(x), std::move(y));
  Schedule sch;
  sch.iterations = 1200;
  sch.burn_in = 600;
  sch.seed = 101;
  const PosteriorDraws d = run_chain(data, nullptr, Hyperparams::defaults(50), sch);
  double acc = 0.0;
  for (std::size_t l = 0; l < d.num_draws; ++l)
    for (std::size_t i = 0; i < d.n_train; ++i) acc += normal_cdf(d.f1t(l, i));
  const double mean_p1 = acc / (double(d.num_draws) * double(d.n_train));
  CHECK(mean_p1 > 0.45);
  CHECK(mean_p1 < 0.55);
}
