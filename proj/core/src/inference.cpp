#include "hobz/inference.hpp"

#include <algorithm>
#include <cmath>

#include "hobz/errors.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/parallel.hpp"
#include "hobz/sampler.hpp"

namespace hobz {

double expected_outcome(double f1, double f0, double fb) {
  const double p1 = normal_cdf(f1);
  const double mu = fb / (1.0 + fb);
  return p1 + mu * (1.0 - normal_cdf(f0)) * (1.0 - p1);
}

double expected_partial_outcome(double f0, double fb) {
  return fb / (1.0 + fb) * (1.0 - normal_cdf(f0));
}

PredictionDraw sample_prediction(double f1, double f0, double fb, double kappa,
                                 Rng& rng) {
  PredictionDraw d;
  if (rng.uniform() < normal_cdf(f1)) {
    d.category = PredCategory::one;
    d.value = 1.0;
    return d;
  }
  if (rng.uniform() < normal_cdf(f0)) {
    d.category = PredCategory::zero;
    d.value = 0.0;
    return d;
  }
  d.category = PredCategory::interior;
  // Redraw on boundary underflow; the interior value must stay open.
  do {
    d.value = rng.beta(kappa * fb, kappa);
  } while (d.value <= 0.0 || d.value >= 1.0);
  return d;
}

std::vector<PredictionDraw> predict_draws(const PosteriorDraws& draws, Rng& rng) {
  if (draws.num_draws == 0) throw ValidationError("predict_draws: empty draw set");
  const bool test = draws.has_test();
  const std::size_t n = test ? draws.n_test : draws.n_train;
  std::vector<PredictionDraw> out;
  out.reserve(static_cast<std::size_t>(draws.num_draws) * n);
  for (std::size_t l = 0; l < draws.num_draws; ++l) {
    for (std::size_t i = 0; i < n; ++i) {
      const double f1 = test ? draws.f1s(l, i) : draws.f1t(l, i);
      const double f0 = test ? draws.f0s(l, i) : draws.f0t(l, i);
      const double fb = test ? draws.fbs(l, i) : draws.fbt(l, i);
      out.push_back(sample_prediction(f1, f0, fb, draws.kappa[l], rng));
    }
  }
  return out;
}

std::string to_string(PiteMetric m) {
  return m == PiteMetric::full_expectation ? "full" : "partial";
}

PiteMetric pite_metric_from_string(const std::string& s) {
  if (s == "full" || s == "full_expectation") return PiteMetric::full_expectation;
  if (s == "partial" || s == "partial_expectation") return PiteMetric::partial_expectation;
  throw ValidationError("unknown pite metric '" + s + "' (expected full|partial)");
}

PiteResult compute_pite(const PosteriorDraws& arm_t, const PosteriorDraws& arm_c,
                        PiteMetric metric, double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("compute_pite: level must lie in (0,1)");
  if (arm_t.num_draws != arm_c.num_draws || arm_t.num_draws == 0)
    throw ValidationError("compute_pite: draw sets must be nonempty with equal L");
  const bool test = arm_t.has_test();
  if (test != arm_c.has_test())
    throw ValidationError("compute_pite: arms disagree on test rows");
  const std::size_t n = test ? arm_t.n_test : arm_t.n_train;
  const std::size_t n_c = test ? arm_c.n_test : arm_c.n_train;
  if (n != n_c) throw ValidationError("compute_pite: arms cover different individuals");

  PiteResult res;
  res.metric = metric;
  res.level = level;
  res.point.resize(n);
  res.lower.resize(n);
  res.upper.resize(n);
  const std::size_t L = arm_t.num_draws;
  std::vector<double> contrast(L);
  const double lo_p = (1.0 - level) / 2.0;
  const double hi_p = (1.0 + level) / 2.0;
  double ate = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < L; ++l) {
      double et, ec;
      if (metric == PiteMetric::full_expectation) {
        et = test ? expected_outcome(arm_t.f1s(l, i), arm_t.f0s(l, i), arm_t.fbs(l, i))
                  : expected_outcome(arm_t.f1t(l, i), arm_t.f0t(l, i), arm_t.fbt(l, i));
        ec = test ? expected_outcome(arm_c.f1s(l, i), arm_c.f0s(l, i), arm_c.fbs(l, i))
                  : expected_outcome(arm_c.f1t(l, i), arm_c.f0t(l, i), arm_c.fbt(l, i));
      } else {
        et = test ? expected_partial_outcome(arm_t.f0s(l, i), arm_t.fbs(l, i))
                  : expected_partial_outcome(arm_t.f0t(l, i), arm_t.fbt(l, i));
        ec = test ? expected_partial_outcome(arm_c.f0s(l, i), arm_c.fbs(l, i))
                  : expected_partial_outcome(arm_c.f0t(l, i), arm_c.fbt(l, i));
      }
      contrast[l] = et - ec;
    }
    double m = 0.0;
    for (double v : contrast) m += v;
    m /= static_cast<double>(L);
    res.point[i] = m;
    res.lower[i] = quantile(contrast, lo_p);
    res.upper[i] = quantile(contrast, hi_p);
    ate += m;
  }
  res.ate = ate / static_cast<double>(n);
  return res;
}

namespace {

template <typename F>
std::vector<double> posterior_mean_over_draws(const PosteriorDraws& d, bool use_test,
                                              F&& per_draw) {
  const std::size_t n = use_test ? d.n_test : d.n_train;
  std::vector<double> out(n, 0.0);
  for (std::size_t l = 0; l < d.num_draws; ++l)
    for (std::size_t i = 0; i < n; ++i) out[i] += per_draw(l, i);
  for (double& v : out) v /= static_cast<double>(d.num_draws);
  return out;
}

}  // namespace

std::vector<double> posterior_mean_expected_outcome(const PosteriorDraws& d,
                                                    bool use_test) {
  return posterior_mean_over_draws(d, use_test, [&](std::size_t l, std::size_t i) {
    return use_test ? expected_outcome(d.f1s(l, i), d.f0s(l, i), d.fbs(l, i))
                    : expected_outcome(d.f1t(l, i), d.f0t(l, i), d.fbt(l, i));
  });
}

std::vector<double> posterior_mean_partial_outcome(const PosteriorDraws& d,
                                                   bool use_test) {
  return posterior_mean_over_draws(d, use_test, [&](std::size_t l, std::size_t i) {
    return use_test ? expected_partial_outcome(d.f0s(l, i), d.fbs(l, i))
                    : expected_partial_outcome(d.f0t(l, i), d.fbt(l, i));
  });
}

std::vector<double> posterior_mean_interior_mean(const PosteriorDraws& d, bool use_test) {
  return posterior_mean_over_draws(d, use_test, [&](std::size_t l, std::size_t i) {
    const double fb = use_test ? d.fbs(l, i) : d.fbt(l, i);
    return fb / (1.0 + fb);
  });
}

std::vector<double> posterior_median_interior_mean(const PosteriorDraws& d,
                                                   bool use_test) {
  const std::size_t n = use_test ? d.n_test : d.n_train;
  std::vector<double> out(n, 0.0), draws(d.num_draws);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < d.num_draws; ++l) {
      const double fb = use_test ? d.fbs(l, i) : d.fbt(l, i);
      draws[l] = fb / (1.0 + fb);
    }
    out[i] = quantile(draws, 0.5);
  }
  return out;
}

MetricsReport compute_metrics(std::span<const double> predicted,
                              std::span<const double> observed) {
  if (predicted.size() != observed.size())
    throw ValidationError("compute_metrics: length mismatch");
  const std::size_t n = predicted.size();
  if (n < 3) throw ValidationError("compute_metrics: need at least 3 observations");
  MetricsReport r;
  double sae = 0.0, sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = predicted[i] - observed[i];
    sae += std::abs(d);
    sse += d * d;
  }
  const double dn = static_cast<double>(n);
  r.mae = sae / dn;
  r.mse = sse / dn;
  r.rmse = std::sqrt(r.mse);

  const double mp = mean(predicted);
  const double mo = mean(observed);
  double spp = 0.0, soo = 0.0, spo = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    spp += (predicted[i] - mp) * (predicted[i] - mp);
    soo += (observed[i] - mo) * (observed[i] - mo);
    spo += (predicted[i] - mp) * (observed[i] - mo);
  }
  if (spp <= 0.0 || soo <= 0.0) {
    r.adj_r2 = 0.0;
    r.degenerate = true;
    return r;
  }
  const double r2 = spo * spo / (spp * soo);
  r.adj_r2 = 1.0 - (1.0 - r2) * (dn - 1.0) / (dn - 2.0);
  return r;
}

namespace {

// Row-set fingerprint. Chain seeds key on the trained subset, not on which
// arm role it plays, so relabeling the arms cannot change any fit.
std::uint64_t subset_tag(const std::vector<std::size_t>& rows) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t r : rows) {
    h ^= static_cast<std::uint64_t>(r) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Fits both arms under the given labels and returns the per-individual PITE
// point estimates over the full cohort.
PiteResult pite_for_labels(const Dataset& data, const std::vector<std::int8_t>& labels,
                           const Hyperparams& h, const Schedule& schedule,
                           PiteMetric metric, double level) {
  std::vector<std::size_t> rows_t, rows_c;
  for (std::size_t i = 0; i < data.n_rows(); ++i)
    (labels[i] == 1 ? rows_t : rows_c).push_back(i);
  if (rows_t.empty() || rows_c.empty())
    throw ValidationError("permutation test: a permuted arm came up empty");
  Dataset arm_t = data.subset(rows_t);
  Dataset arm_c = data.subset(rows_c);
  arm_t.arm.clear();
  arm_c.arm.clear();

  Schedule sch_t = schedule;
  Schedule sch_c = schedule;
  const Rng root(schedule.seed);
  sch_t.seed = root.substream(subset_tag(rows_t)).seed();
  sch_c.seed = root.substream(subset_tag(rows_c)).seed();

  const PosteriorDraws dt = run_chain(arm_t, &data.x, h, sch_t);
  const PosteriorDraws dc = run_chain(arm_c, &data.x, h, sch_c);
  return compute_pite(dt, dc, metric, level);
}

}  // namespace

PiteResult fit_and_compute_pite(const Dataset& two_arm, const Hyperparams& h,
                                const Schedule& schedule, PiteMetric metric,
                                double level) {
  if (two_arm.arm.empty())
    throw ValidationError("pite: dataset carries no arm labels");
  return pite_for_labels(two_arm, two_arm.arm, h, schedule, metric, level);
}

PermTestResult permutation_test(const Dataset& two_arm, const Hyperparams& h,
                                const Schedule& schedule, PiteMetric metric,
                                std::int32_t n_perm, unsigned n_threads) {
  if (two_arm.arm.empty())
    throw ValidationError("permutation test: dataset carries no arm labels");
  bool has0 = false, has1 = false;
  for (std::int8_t a : two_arm.arm) (a == 1 ? has1 : has0) = true;
  if (!has0 || !has1)
    throw ValidationError("permutation test: both arms must be present");
  if (n_perm < 1) throw ValidationError("permutation test: n_perm must be >= 1");

  PermTestResult res;
  res.permuted_pite_sds.assign(n_perm, 0.0);

  const PiteResult observed =
      pite_for_labels(two_arm, two_arm.arm, h, schedule, metric, 0.6);
  res.observed_pite_sd = sample_sd(observed.point);

  const Rng root(schedule.seed);
  parallel_for(static_cast<std::size_t>(n_perm), n_threads, [&](std::size_t p) {
    Rng stream = root.substream(p + 1);
    std::vector<std::int8_t> labels = two_arm.arm;
    // Fisher-Yates shuffle of the arm labels.
    for (std::size_t i = labels.size() - 1; i > 0; --i)
      std::swap(labels[i], labels[stream.uniform_int(i + 1)]);
    Schedule sch = schedule;
    sch.seed = stream.substream(0xfe11).seed();
    const PiteResult perm = pite_for_labels(two_arm, labels, h, sch, metric, 0.6);
    res.permuted_pite_sds[p] = sample_sd(perm.point);
  });

  std::int32_t ge = 0;
  for (double s : res.permuted_pite_sds)
    if (s >= res.observed_pite_sd) ++ge;
  res.p_raw = static_cast<double>(ge) / static_cast<double>(n_perm);
  res.p_value = (1.0 + static_cast<double>(ge)) / (1.0 + static_cast<double>(n_perm));
  return res;
}

}  // namespace hobz
