#include <doctest.h>

#include <cmath>
#include <vector>

#include "hobz/inference.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/sampler.hpp"
#include "hobz/simgen.hpp"

using namespace hobz;

namespace {

PosteriorDraws constant_draws(std::size_t L, double f1, double f0, double fb,
                              double kappa) {
  PosteriorDraws d;
  d.n_train = 1;
  d.num_draws = static_cast<std::uint32_t>(L);
  d.kappa.assign(L, kappa);
  d.f1_train.assign(L, f1);
  d.f0_train.assign(L, f0);
  d.fb_train.assign(L, fb);
  return d;
}

}  // namespace

TEST_CASE("expected_outcome: frozen value and limits") {
  CHECK(expected_outcome(0.0, 0.0, 1.0) == doctest::Approx(0.625).epsilon(1e-12));
  CHECK(expected_outcome(40.0, 0.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(expected_outcome(-40.0, 40.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(expected_partial_outcome(0.0, 1.0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(expected_partial_outcome(40.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(expected_partial_outcome(-40.0, 1e12) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("expected outcomes are monotone in each argument") {
  double prev = -1.0;
  for (double f1 = -3.0; f1 <= 3.0; f1 += 0.25) {
    const double v = expected_outcome(f1, 0.3, 0.8);
    CHECK(v >= prev);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
  prev = 2.0;
  for (double f0 = -3.0; f0 <= 3.0; f0 += 0.25) {
    const double v = expected_outcome(-0.4, f0, 0.8);
    CHECK(v <= prev);
    prev = v;
  }
  prev = -1.0;
  for (double fb = 0.05; fb <= 20.0; fb *= 1.6) {
    const double v = expected_outcome(-0.4, 0.3, fb);
    CHECK(v >= prev);
    prev = v;
    const double w = expected_partial_outcome(0.3, fb);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
  }
}

TEST_CASE("predict_draws: degenerate one-category and tri-part frequencies") {
  Rng rng(7);
  const PosteriorDraws ones = constant_draws(2000, 20.0, 0.0, 1.0, 2.0);
  for (const PredictionDraw& p : predict_draws(ones, rng)) {
    CHECK(p.category == PredCategory::one);
    CHECK(p.value == 1.0);
  }

  const std::size_t n = 100000;
  const PosteriorDraws mid = constant_draws(n, 0.0, 0.0, 1.0, 2.0);
  std::size_t c1 = 0, c0 = 0, ci = 0;
  for (const PredictionDraw& p : predict_draws(mid, rng)) {
    if (p.category == PredCategory::one) {
      ++c1;
      CHECK(p.value == 1.0);
    } else if (p.category == PredCategory::zero) {
      ++c0;
      CHECK(p.value == 0.0);
    } else {
      ++ci;
      CHECK(p.value > 0.0);
      CHECK(p.value < 1.0);
    }
  }
  const double dn = static_cast<double>(n);
  CHECK(std::abs(c1 / dn - 0.5) < 3.0 * std::sqrt(0.25 / dn));
  CHECK(std::abs(c0 / dn - 0.25) < 3.0 * std::sqrt(0.1875 / dn));
  CHECK(std::abs(ci / dn - 0.25) < 3.0 * std::sqrt(0.1875 / dn));
}

TEST_CASE("predict_draws mean converges to expected_outcome") {
  Rng param_rng(11);
  for (int rep = 0; rep < 6; ++rep) {
    const double f1 = 1.5 * param_rng.normal();
    const double f0 = 1.5 * param_rng.normal();
    const double fb = std::exp(param_rng.normal());
    const double kappa = 0.5 + 4.0 * param_rng.uniform();
    const std::size_t n = 200000;
    Rng rng(1100 + rep);
    const PosteriorDraws d = constant_draws(n, f1, f0, fb, kappa);
    double s = 0, ss = 0;
    for (const PredictionDraw& p : predict_draws(d, rng)) {
      s += p.value;
      ss += p.value * p.value;
    }
    const double m = s / double(n);
    const double se = std::sqrt((ss / double(n) - m * m) / double(n));
    CHECK(std::abs(m - expected_outcome(f1, f0, fb)) < 3.0 * se + 1e-9);
  }
}

TEST_CASE("compute_pite: identical arms give zero effects") {
  PosteriorDraws a = constant_draws(50, 0.3, -0.2, 1.4, 2.0);
  const PiteResult r = compute_pite(a, a, PiteMetric::full_expectation, 0.6);
  CHECK(r.point[0] == 0.0);
  CHECK(r.lower[0] == 0.0);
  CHECK(r.upper[0] == 0.0);
  CHECK(r.ate == 0.0);
}

TEST_CASE("compute_pite: saturated treatment arm") {
  const PosteriorDraws t = constant_draws(50, 60.0, 0.0, 1.0, 2.0);
  const PosteriorDraws c = constant_draws(50, 0.2, -0.1, 0.9, 2.0);
  const PiteResult r = compute_pite(t, c, PiteMetric::full_expectation, 0.6);
  const double ec = expected_outcome(0.2, -0.1, 0.9);
  CHECK(r.point[0] == doctest::Approx(1.0 - ec).epsilon(1e-12));
}

TEST_CASE("compute_pite: swapping arms negates points and mirrors bounds") {
  Rng rng(13);
  PosteriorDraws a = constant_draws(300, 0, 0, 1, 2), b = a;
  for (std::size_t l = 0; l < 300; ++l) {
    a.f1_train[l] = rng.normal();
    a.f0_train[l] = rng.normal();
    a.fb_train[l] = std::exp(0.5 * rng.normal());
    b.f1_train[l] = rng.normal();
    b.f0_train[l] = rng.normal();
    b.fb_train[l] = std::exp(0.5 * rng.normal());
  }
  const PiteResult ab = compute_pite(a, b, PiteMetric::partial_expectation, 0.6);
  const PiteResult ba = compute_pite(b, a, PiteMetric::partial_expectation, 0.6);
  CHECK(ab.point[0] == doctest::Approx(-ba.point[0]).epsilon(1e-12));
  CHECK(ab.lower[0] == doctest::Approx(-ba.upper[0]).epsilon(1e-12));
  CHECK(ab.upper[0] == doctest::Approx(-ba.lower[0]).epsilon(1e-12));
  CHECK(ab.ate == doctest::Approx(-ba.ate).epsilon(1e-12));
  CHECK(ab.lower[0] <= ab.point[0]);
  CHECK(ab.point[0] <= ab.upper[0]);
}

TEST_CASE("compute_pite rejects mismatched draw sets") {
  const PosteriorDraws a = constant_draws(50, 0, 0, 1, 2);
  const PosteriorDraws b = constant_draws(40, 0, 0, 1, 2);
  CHECK_THROWS_AS((void)compute_pite(a, b, PiteMetric::full_expectation, 0.6),
                  ValidationError);
  PosteriorDraws c = a;
  c.n_train = 2;  // wrong individual count
  CHECK_THROWS(compute_pite(a, c, PiteMetric::full_expectation, 0.6));
}

TEST_CASE("compute_metrics: frozen examples") {
  const std::vector<double> obs{0.1, 0.4, 0.8, 0.3};
  MetricsReport m = compute_metrics(obs, obs);
  CHECK(m.mae == 0.0);
  CHECK(m.mse == 0.0);
  CHECK(m.adj_r2 == doctest::Approx(1.0).epsilon(1e-12));

  std::vector<double> shifted;
  for (double v : obs) shifted.push_back(v + 0.1);
  m = compute_metrics(shifted, obs);
  CHECK(m.mae == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.mse == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(m.rmse == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.adj_r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(m.degenerate);
}

TEST_CASE("compute_metrics: adj_r2 invariant under affine prediction maps") {
  Rng rng(17);
  std::vector<double> pred(40), obs(40);
  for (std::size_t i = 0; i < 40; ++i) {
    pred[i] = rng.uniform();
    obs[i] = 0.7 * pred[i] + 0.1 * rng.normal();
  }
  const double base = compute_metrics(pred, obs).adj_r2;
  std::vector<double> scaled;
  for (double v : pred) scaled.push_back(-3.0 * v + 11.0);
  CHECK(compute_metrics(scaled, obs).adj_r2 == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("compute_metrics: zero-variance predictions flagged") {
  const std::vector<double> pred(5, 0.4);
  const std::vector<double> obs{0.1, 0.2, 0.3, 0.4, 0.5};
  const MetricsReport m = compute_metrics(pred, obs);
  CHECK(m.degenerate);
  CHECK(m.adj_r2 == 0.0);
  CHECK_THROWS(compute_metrics(std::vector<double>{0.1}, std::vector<double>{0.1}));
}

TEST_CASE("permutation_test: configuration errors") {
  SimConfig cfg = preset_by_name("null-two-arm");
  cfg.n = 40;
  cfg.seed = 19;
  auto [data, truth] = generate_dataset(cfg);
  Schedule sch;
  sch.iterations = 10;
  sch.burn_in = 5;
  const Hyperparams h = Hyperparams::defaults(3);
  CHECK_THROWS_AS((void)permutation_test(data, h, sch, PiteMetric::full_expectation, 0),
                  ValidationError);
  Dataset single = data;
  std::fill(single.arm.begin(), single.arm.end(), 1);
  CHECK_THROWS_AS(
      (void)permutation_test(single, h, sch, PiteMetric::full_expectation, 5),
      ValidationError);
  Dataset no_arm = data;
  no_arm.arm.clear();
  CHECK_THROWS_AS(
      (void)permutation_test(no_arm, h, sch, PiteMetric::full_expectation, 5),
      ValidationError);
}

TEST_CASE("permutation_test: shape contract and relabel invariance") {
  SimConfig cfg = preset_by_name("null-two-arm");
  cfg.n = 60;
  cfg.seed = 23;
  auto [data, truth] = generate_dataset(cfg);
  Schedule sch;
  sch.iterations = 40;
  sch.burn_in = 20;
  sch.seed = 5;
  const Hyperparams h = Hyperparams::defaults(5);
  const PermTestResult r =
      permutation_test(data, h, sch, PiteMetric::partial_expectation, 9, 2);
  CHECK(r.permuted_pite_sds.size() == 9);
  CHECK(r.p_value >= 0.0);
  CHECK(r.p_value <= 1.0);
  CHECK(r.p_raw >= 0.0);
  CHECK(r.observed_pite_sd >= 0.0);

  // Swapping which label is "treatment" flips PITE signs; sds are unchanged.
  Dataset swapped = data;
  for (auto& a : swapped.arm) a = static_cast<std::int8_t>(1 - a);
  const PermTestResult r2 =
      permutation_test(swapped, h, sch, PiteMetric::partial_expectation, 9, 2);
  CHECK(r2.p_value == doctest::Approx(r.p_value).epsilon(1e-12));
}

TEST_CASE("pite on a constructed two-arm effect recovers the analytic ATE") {
  // Arm T interior mean 0.7, arm C 0.5; boundary probabilities equal, so the
  // full-expectation contrast is P(interior) * 0.2 = (1-0.25)*(1-0.25)*0.2.
  Rng gen(29);
  const std::size_t n_arm = 300;
  Matrix x(2 * n_arm, 2);
  for (double& v : x.data) v = gen.normal();
  std::vector<double> y(2 * n_arm);
  std::vector<std::int8_t> arm(2 * n_arm);
  for (std::size_t i = 0; i < 2 * n_arm; ++i) {
    arm[i] = i < n_arm ? 1 : 0;
    const double lam = arm[i] == 1 ? 0.7 / 0.3 : 1.0;
    if (gen.uniform() < 0.25) {
      y[i] = 1.0;
    } else if (gen.uniform() < 0.25) {
      y[i] = 0.0;
    } else {
      do {
        y[i] = gen.beta(8.0 * lam, 8.0);
      } while (y[i] <= 0.0 || y[i] >= 1.0);
    }
  }
  Dataset data = Dataset::from_xy(std::move(x), std::move(y));
  data.arm = std::move(arm);
  data.arm_name_0 = "C";
  data.arm_name_1 = "T";

  Schedule sch;
  sch.iterations = 800;
  sch.burn_in = 400;
  sch.seed = 31;
  const PiteResult r = fit_and_compute_pite(data, Hyperparams::defaults(30), sch,
                                            PiteMetric::full_expectation);
  const double truth_ate = 0.75 * 0.75 * 0.2;
  CHECK(std::abs(r.ate - truth_ate) < 0.03);
}
