#include <doctest.h>

#include <cmath>
#include <vector>

#include "hobz/mathutil.hpp"
#include "hobz/rng.hpp"

using hobz::Rng;

TEST_CASE("same seed reproduces the stream, substreams differ") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  Rng s0 = a.substream(0), s1 = a.substream(1);
  CHECK(s0.uniform() != s1.uniform());
  (void)c;
}

TEST_CASE("normal and gamma moments") {
  Rng rng(7);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(std::abs(ss / n - 1.0) < 0.02);

  // Gamma(2.5, 1.5): mean 5/3, var 10/9.
  s = ss = 0;
  for (int i = 0; i < n; ++i) {
    const double g = rng.gamma(2.5, 1.5);
    s += g;
    ss += g * g;
  }
  const double m = s / n;
  CHECK(std::abs(m - 2.5 / 1.5) < 0.02);
  CHECK(std::abs((ss / n - m * m) - 2.5 / (1.5 * 1.5)) < 0.04);

  // Small shape branch.
  s = 0;
  for (int i = 0; i < n; ++i) s += rng.gamma(0.4, 2.0);
  CHECK(std::abs(s / n - 0.2) < 0.01);
}

TEST_CASE("beta moments") {
  Rng rng(11);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double b = rng.beta(10.0, 5.0);
    s += b;
    ss += b * b;
  }
  const double m = s / n;
  CHECK(std::abs(m - 2.0 / 3.0) < 0.005);
  CHECK(std::abs((ss / n - m * m) - (10.0 * 5.0) / (225.0 * 16.0)) < 0.002);
}

namespace {

// Closed-form moments of N(mu,1) truncated to (lower, inf). The upper tail
// goes through erfc directly; 1 - Phi(a) cancels catastrophically at a = 8.
void tn_moments(double mu, double lower, double& mean, double& var) {
  const double a = lower - mu;
  const double phi = hobz::normal_pdf(a);
  const double z = 0.5 * std::erfc(a * M_SQRT1_2);
  const double h = phi / z;
  mean = mu + h;
  var = 1.0 + a * h - h * h;
}

}  // namespace

TEST_CASE("truncated normal matches closed-form moments") {
  Rng rng(13);
  const int n = 1000000;

  SUBCASE("half-normal: mean sqrt(2/pi)") {
    double s = 0;
    for (int i = 0; i < n; ++i) s += rng.truncated_normal_above(0.0, 0.0);
    const double target = std::sqrt(2.0 / M_PI);
    const double sd = std::sqrt(1.0 - target * target);  // half-normal sd
    CHECK(std::abs(s / n - target) < 3.0 * sd / std::sqrt(double(n)));
  }

  SUBCASE("deep tail a = 8 stays exact and finite") {
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
      const double x = rng.truncated_normal_above(0.0, 8.0);
      REQUIRE(std::isfinite(x));
      REQUIRE(x > 8.0);
      s += x;
      ss += x * x;
    }
    double mean, var;
    tn_moments(0.0, 8.0, mean, var);
    const double m = s / n;
    CHECK(std::abs(m - mean) < 3.0 * std::sqrt(var / n));
    CHECK(std::abs((ss / n - m * m) - var) < 0.01 * var + 3e-4);
  }

  SUBCASE("mean 8 truncated below 0: near-unconstrained normal") {
    double s = 0;
    for (int i = 0; i < n / 10; ++i) {
      const double x = rng.truncated_normal_below(8.0, 0.0);
      REQUIRE(x < 0.0);
      s += x;
    }
    double mean, var;
    tn_moments(-8.0, 0.0, mean, var);
    CHECK(std::abs(s / (n / 10) + mean) < 3.0 * std::sqrt(var / (n / 10)));
  }
}
