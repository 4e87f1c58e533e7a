#include "hobz/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "hobz/errors.hpp"
#include "hobz/mathutil.hpp"

namespace hobz {

void SimConfig::validate() const {
  if (n < 0) throw ValidationError("simgen: n must be nonnegative");
  if (p_base < 1) throw ValidationError("simgen: p_base must be positive");
  if (!(kappa_true > 0.0)) throw ValidationError("simgen: kappa_true must be positive");
  if (expansion) {
    if (expansion->base_dim != p_base)
      throw ValidationError("simgen: expansion base_dim must equal p_base");
    const std::int64_t total = (std::int64_t{1} << expansion->base_dim) - 1;
    if (expansion->select_k < 1 || expansion->select_k > total)
      throw ValidationError("simgen: select_k must lie in [1, 2^base_dim - 1]");
  }
  const std::size_t want = static_cast<std::size_t>(design_dim()) + 1;
  if (kind == GenKind::linear &&
      (beta_alpha.size() != want || beta_gamma.size() != want || beta_mu.size() != want))
    throw ValidationError("simgen: coefficient length must be design_dim + 1");
  if (!sigma.empty() &&
      sigma.size() != static_cast<std::size_t>(p_base) * static_cast<std::size_t>(p_base))
    throw ValidationError("simgen: sigma must be p_base x p_base");
}

namespace {

// Canonical subset order: by size, then lexicographically by index set.
std::vector<std::vector<int>> canonical_subsets(int base_dim) {
  std::vector<std::vector<int>> subsets;
  for (int size = 1; size <= base_dim; ++size) {
    std::vector<int> idx(size);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      subsets.push_back(idx);
      int i = size - 1;
      while (i >= 0 && idx[i] == base_dim - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return subsets;
}

}  // namespace

Matrix build_interaction_expansion(const Matrix& base, std::int32_t select_k, Rng& rng) {
  const int b = static_cast<int>(base.n_cols);
  const auto subsets = canonical_subsets(b);
  const std::int64_t total = static_cast<std::int64_t>(subsets.size());
  if (select_k < 1 || select_k > total)
    throw ValidationError("interaction expansion: select_k out of range [1, " +
                          std::to_string(total) + "]");

  // Partial Fisher-Yates; chosen indices are kept in canonical order.
  std::vector<std::int32_t> pool(subsets.size());
  std::iota(pool.begin(), pool.end(), 0);
  for (std::int32_t i = 0; i < select_k; ++i) {
    const std::size_t j = i + rng.uniform_int(pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<std::int32_t> chosen(pool.begin(), pool.begin() + select_k);
  std::sort(chosen.begin(), chosen.end());

  Matrix out(base.n_rows, static_cast<std::size_t>(select_k) + 1);
  for (std::size_t i = 0; i < base.n_rows; ++i) {
    out.at(i, 0) = 1.0;
    for (std::int32_t c = 0; c < select_k; ++c) {
      double prod = 1.0;
      for (int j : subsets[chosen[c]]) prod *= base.at(i, j);
      out.at(i, static_cast<std::size_t>(c) + 1) = prod;
    }
  }
  return out;
}

namespace {

// Fixed nonlinear basis used by the nonlinear desk-study preset; the first
// seven functions of up to seven covariates, cycled if p_base is smaller.
double nonlinear_feature(int which, std::span<const double> x) {
  const int p = static_cast<int>(x.size());
  auto v = [&](int j) { return x[j % p]; };
  switch (which) {
    case 0: return std::sin(M_PI * v(0));
    case 1: return v(1) * v(2);
    case 2: return std::abs(v(3)) - std::sqrt(2.0 / M_PI);
    case 3: return v(4) * v(4) - 1.0;
    case 4: return std::cos(M_PI * v(5));
    case 5: return v(6);
    default: return v(0) * v(4);
  }
}

constexpr int kNonlinearTerms = 7;

}  // namespace

std::pair<Dataset, SimTruth> generate_dataset(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const std::size_t n = static_cast<std::size_t>(cfg.n);
  const std::size_t p = static_cast<std::size_t>(cfg.p_base);

  // Base covariates: N_p(0, Sigma) via the lower Cholesky factor.
  Matrix x(n, p);
  if (cfg.sigma.empty()) {
    for (double& v : x.data) v = rng.normal();
  } else {
    Eigen::MatrixXd sig(p, p);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < p; ++j) sig(i, j) = cfg.sigma[i * p + j];
    Eigen::LLT<Eigen::MatrixXd> llt(sig);
    if (llt.info() != Eigen::Success)
      throw NumericError("simgen: covariance is not positive definite");
    const Eigen::MatrixXd chol = llt.matrixL();
    Eigen::VectorXd z(p);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) z(j) = rng.normal();
      const Eigen::VectorXd row = chol * z;
      for (std::size_t j = 0; j < p; ++j) x.at(i, j) = row(j);
    }
  }

  // Linear predictors on the design implied by the config.
  std::vector<double> lin_a(n, 0.0), lin_g(n, 0.0), lin_m(n, 0.0);
  if (cfg.kind == GenKind::linear) {
    Matrix design;
    if (cfg.expansion) {
      design = build_interaction_expansion(x, cfg.expansion->select_k, rng);
    } else {
      design = Matrix(n, p + 1);
      for (std::size_t i = 0; i < n; ++i) {
        design.at(i, 0) = 1.0;
        for (std::size_t j = 0; j < p; ++j) design.at(i, j + 1) = x.at(i, j);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      double a = 0.0, g = 0.0, m = 0.0;
      for (std::size_t j = 0; j < design.n_cols; ++j) {
        const double v = design.at(i, j);
        a += v * cfg.beta_alpha[j];
        g += v * cfg.beta_gamma[j];
        m += v * cfg.beta_mu[j];
      }
      lin_a[i] = a;
      lin_g[i] = g;
      lin_m[i] = m;
    }
  } else {
    // Nonlinear variant: coefficients over a fixed nonlinear basis, drawn once
    // from the config seed so replications share the same truth function.
    Rng coef_rng = Rng(cfg.seed).substream(0xc0ef);
    std::vector<double> ca(kNonlinearTerms + 1), cg(kNonlinearTerms + 1),
        cm(kNonlinearTerms + 1);
    for (auto* v : {&ca, &cg, &cm})
      for (double& c : *v) c = 0.5 * coef_rng.normal();
    for (std::size_t i = 0; i < n; ++i) {
      const auto row = x.row(i);
      double a = ca[0], g = cg[0], m = cm[0];
      for (int k = 0; k < kNonlinearTerms; ++k) {
        const double f = nonlinear_feature(k, row);
        a += ca[k + 1] * f;
        g += cg[k + 1] * f;
        m += cm[k + 1] * f;
      }
      lin_a[i] = a;
      lin_g[i] = g;
      lin_m[i] = m;
    }
  }

  SimTruth truth;
  truth.theta1.resize(n);
  truth.theta0.resize(n);
  truth.lambda.resize(n);
  truth.d1.assign(n, 0);
  truth.d2.assign(n, 0);
  truth.expected_y.resize(n);
  std::vector<double> y(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double t1 = normal_cdf(lin_a[i]);
    const double t0 = normal_cdf(lin_g[i]);
    // The interior mean saturates well inside this range; the clip keeps
    // Beta(kappa lambda, kappa) draws representable away from the
    // boundaries (heavy-tailed interaction predictors can otherwise push
    // lambda past any floating-point interior value).
    const double lam = std::exp(std::clamp(lin_m[i], -8.0, 8.0));
    truth.theta1[i] = t1;
    truth.theta0[i] = t0;
    truth.lambda[i] = lam;
    truth.expected_y[i] = t1 + (1.0 - t1) * (1.0 - t0) * lam / (1.0 + lam);

    if (rng.uniform() < t1) {
      truth.d1[i] = 1;
      y[i] = 1.0;
    } else if (rng.uniform() < t0) {
      truth.d2[i] = 1;
      y[i] = 0.0;
    } else {
      // Open interval by rejection, never truncation.
      double v = rng.beta(cfg.kappa_true * lam, cfg.kappa_true);
      for (int tries = 0; v <= 0.0 || v >= 1.0; ++tries) {
        if (tries > 10000)
          throw NumericError("simgen: interior draw unrepresentable at row " +
                             std::to_string(i) + " (lambda " + std::to_string(lam) +
                             ")");
        v = rng.beta(cfg.kappa_true * lam, cfg.kappa_true);
      }
      y[i] = v;
    }
  }

  Dataset data = Dataset::from_xy(std::move(x), std::move(y));
  data.column_names.resize(p);
  for (std::size_t j = 0; j < p; ++j) data.column_names[j] = "x" + std::to_string(j + 1);

  if (cfg.two_arm) {
    // Balanced labels, shuffled independently of the outcome.
    data.arm.assign(n, 0);
    for (std::size_t i = n / 2; i < n; ++i) data.arm[i] = 1;
    for (std::size_t i = n; i > 1; --i)
      std::swap(data.arm[i - 1], data.arm[rng.uniform_int(i)]);
    data.arm_name_0 = "C";
    data.arm_name_1 = "T";
  }
  return {std::move(data), std::move(truth)};
}

namespace {

std::vector<double> draw_coefficients(Rng& rng, std::size_t len, double sd) {
  std::vector<double> out(len);
  for (double& v : out) v = sd * rng.normal();
  return out;
}

// Category proportions and interior-mean scale implied by a config, probed on
// a fixed large sample.
struct PresetBalance {
  double p_one, p_zero, p_interior, lambda_median, mu_sd;
};

PresetBalance probe_balance(const SimConfig& cfg) {
  SimConfig probe = cfg;
  probe.name = "probe";
  probe.n = 4000;
  probe.seed = 424242;
  probe.two_arm = false;
  auto [d, t] = generate_dataset(probe);
  PresetBalance b;
  const double n = static_cast<double>(d.n_rows());
  b.p_one = d.n_ones / n;
  b.p_zero = d.n_zeros / n;
  b.p_interior = d.n_interior / n;
  b.lambda_median = quantile(t.lambda, 0.5);
  std::vector<double> mu(d.n_rows());
  for (std::size_t i = 0; i < d.n_rows(); ++i) mu[i] = t.interior_mean(i);
  b.mu_sd = sample_sd(mu);
  return b;
}

enum class PresetStyle { raw, balanced, desk };

bool preset_ok(const SimConfig& cfg, PresetStyle style) {
  if (style == PresetStyle::raw) return true;
  const PresetBalance b = probe_balance(cfg);
  // Visible mass at both boundaries plus an estimable interior.
  if (!(b.p_one >= 0.15 && b.p_one <= 0.35 && b.p_zero >= 0.15 && b.p_zero <= 0.35 &&
        b.p_interior >= 0.35 && b.p_interior <= 0.65))
    return false;
  if (style == PresetStyle::desk) {
    // Desk studies live where the Beta-function approximation is sharp
    // (lambda above ~1.8), the interior component is well populated, and
    // the interior-mean spread is learnable at their small n.
    SimConfig probe = cfg;
    probe.name = "probe";
    probe.n = 4000;
    probe.seed = 424242;
    probe.two_arm = false;
    auto [d, t] = generate_dataset(probe);
    const double q10 = quantile(t.lambda, 0.10);
    const double med = quantile(t.lambda, 0.50);
    if (!(q10 >= 1.8 && med <= 4.5)) return false;
    if (!(b.p_interior >= 0.5)) return false;
    if (!(b.mu_sd >= 0.04 && b.mu_sd <= 0.12)) return false;
  } else {
    if (!(b.lambda_median >= 0.7 && b.lambda_median <= 3.0)) return false;
  }
  return true;
}

// Scenario coefficients are one set of N(0, sd^2) draws per candidate seed,
// stepping the seed deterministically until the implied hurdle passes
// preset_ok. Desk presets keep the interior-mean predictor variance at its
// p = 3 calibration and center the log interior mean at +1.2 so the scale
// sits in the sharp region of the Beta-function approximation.
SimConfig make_linear_preset(const std::string& name, std::int32_t n, std::int32_t p,
                             std::optional<ExpansionSpec> exp, std::uint64_t coef_seed,
                             double coef_sd = 0.5, double kappa = 5.0,
                             PresetStyle style = PresetStyle::balanced) {
  SimConfig cfg;
  cfg.name = name;
  cfg.n = n;
  cfg.p_base = exp ? exp->base_dim : p;
  cfg.expansion = exp;
  cfg.kappa_true = kappa;
  const std::size_t len = static_cast<std::size_t>(cfg.design_dim()) + 1;
  const double mu_sd =
      style == PresetStyle::desk
          ? coef_sd * std::sqrt(3.0 / static_cast<double>(cfg.design_dim()))
          : coef_sd;
  for (std::uint64_t seed = coef_seed; seed < coef_seed + 20000; ++seed) {
    Rng rng(seed);
    cfg.beta_alpha = draw_coefficients(rng, len, coef_sd);
    cfg.beta_gamma = draw_coefficients(rng, len, coef_sd);
    cfg.beta_mu = draw_coefficients(rng, len, mu_sd);
    if (style == PresetStyle::desk) cfg.beta_mu[0] += 1.2;
    if (preset_ok(cfg, style)) return cfg;
  }
  throw NumericError("preset '" + name + "': no balanced coefficient draw found");
}

}  // namespace

namespace {

std::vector<SimConfig> build_presets() {
  std::vector<SimConfig> out;
  std::uint64_t coef_seed = 1001;
  for (std::int32_t n : {250, 500, 750}) {
    for (std::int32_t k : {5, 15, 45}) {
      out.push_back(make_linear_preset(
          "grid-n" + std::to_string(n) + "-p" + std::to_string(k), n, 6,
          ExpansionSpec{6, k}, (coef_seed += 1000)));
    }
  }
  out.push_back(
      make_linear_preset("table-s1", 100, 3, std::nullopt, 20001, 0.5, 5.0,
                         PresetStyle::desk));
  out.push_back(
      make_linear_preset("table-s2-linear", 500, 7, std::nullopt, 30001, 0.5, 5.0,
                         PresetStyle::desk));
  {
    SimConfig cfg;
    cfg.name = "table-s2-nonlinear";
    cfg.n = 500;
    cfg.p_base = 7;
    cfg.kind = GenKind::nonlinear;
    cfg.kappa_true = 5.0;
    out.push_back(cfg);
  }
  {
    // Pure noise: constant probabilities 0.5 / 0.5 and Beta(kappa, kappa).
    SimConfig cfg = make_linear_preset("null", 400, 5, std::nullopt, 0, 0.0, 2.0,
                                       PresetStyle::raw);
    out.push_back(cfg);
  }
  {
    // Two-arm null: shared signal, labels independent of the outcome.
    SimConfig cfg = make_linear_preset("null-two-arm", 200, 5, std::nullopt, 40001);
    cfg.two_arm = true;
    out.push_back(cfg);
  }
  return out;
}

}  // namespace

std::vector<SimConfig> scenario_presets() {
  static const std::vector<SimConfig> cached = build_presets();
  return cached;
}

SimConfig preset_by_name(const std::string& name) {
  for (SimConfig& cfg : scenario_presets())
    if (cfg.name == name) return cfg;
  std::string known;
  for (const SimConfig& cfg : scenario_presets()) known += " " + cfg.name;
  throw ValidationError("unknown preset '" + name + "'; available:" + known);
}

}  // namespace hobz
