#include "hobz/rng.hpp"

#include <cmath>

#include "hobz/errors.hpp"

namespace hobz {

namespace {

// splitmix64; decorrelates nearby seeds before feeding the twister.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

Rng Rng::substream(std::uint64_t index) const {
  return Rng(mix(seed_ ^ mix(index + 0x632be59bd9b4e019ull)));
}

double Rng::uniform() {
  return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  double u;
  do {
    u = uniform();
  } while (u <= 0.0);
  return u;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
  if (n == 0) throw ValidationError("uniform_int: n must be positive");
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t x;
  do {
    x = gen_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  cached_normal_ = v * f;
  has_cached_normal_ = true;
  return u * f;
}

double Rng::exponential() { return -std::log(uniform_pos()); }

double Rng::standard_gamma(double shape) {
  if (shape < 1.0) {
    // Boost to shape+1, then scale back.
    const double u = uniform_pos();
    return standard_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw ValidationError("gamma: shape and rate must be positive");
  double g = standard_gamma(shape) / rate;
  // Subnormal underflow would poison log-scale consumers downstream.
  if (g < 1e-300) g = 1e-300;
  return g;
}

double Rng::beta(double a, double b) {
  // Floors keep tiny-shape draws out of 0/0 territory.
  const double x = std::max(standard_gamma(a), 1e-300);
  const double y = std::max(standard_gamma(b), 1e-300);
  return x / (x + y);
}

double Rng::truncated_normal_above(double mean, double lower) {
  const double a = lower - mean;  // standardized truncation point
  if (a <= 0.0) {
    // Acceptance probability >= 1/2.
    for (;;) {
      const double z = normal();
      if (z > a) return mean + z;
    }
  }
  // Robert (1995): shifted exponential proposal, exact for any tail.
  const double alpha = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + exponential() / alpha;
    const double d = z - alpha;
    if (std::log(uniform_pos()) <= -0.5 * d * d) return mean + z;
  }
}

double Rng::truncated_normal_below(double mean, double upper) {
  return -truncated_normal_above(-mean, -upper);
}

}  // namespace hobz
