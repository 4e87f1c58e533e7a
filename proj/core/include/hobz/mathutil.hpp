#ifndef HOBZ_MATHUTIL_HPP
#define HOBZ_MATHUTIL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hobz {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

// Standard normal CDF. erfc keeps the lower tail accurate far past |x| = 10.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - 0.5 * kLogTwoPi);
}

inline double log_gamma_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// log Beta(y | a, b) with the exact normalizer.
inline double log_beta_pdf(double y, double a, double b) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
         (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
}

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double mean(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Sample standard deviation (n-1 denominator).
inline double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// Type-7 quantile (linear interpolation between order statistics).
inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  p = std::clamp(p, 0.0, 1.0);
  double h = (static_cast<double>(v.size()) - 1.0) * p;
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, v.size() - 1);
  double w = h - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

// FNV-1a, used to stamp artifacts with a config fingerprint.
inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace hobz

#endif
