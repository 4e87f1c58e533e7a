#ifndef HOBZ_INFERENCE_HPP
#define HOBZ_INFERENCE_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hobz/dataset.hpp"
#include "hobz/draws.hpp"
#include "hobz/forest.hpp"
#include "hobz/rng.hpp"

namespace hobz {

// E[Y | f1, f0, f_b] = Phi(f1) + f_b/(1+f_b) (1-Phi(f0)) (1-Phi(f1)).
double expected_outcome(double f1, double f0, double fb);

// E[Y | Y < 1] = f_b/(1+f_b) (1-Phi(f0)).
double expected_partial_outcome(double f0, double fb);

enum class PredCategory : std::uint8_t { one, zero, interior };

struct PredictionDraw {
  PredCategory category = PredCategory::interior;
  double value = 0.5;
};

// One tri-part draw: Bernoulli(Phi(f1)) -> 1; else Bernoulli(Phi(f0)) -> 0;
// else Beta(kappa f_b, kappa) on the open interval.
PredictionDraw sample_prediction(double f1, double f0, double fb, double kappa, Rng& rng);

// Draw-major tri-part samples for every (draw, row) pair. Uses test rows when
// the draw set has them, train rows otherwise.
std::vector<PredictionDraw> predict_draws(const PosteriorDraws& draws, Rng& rng);

enum class PiteMetric { full_expectation, partial_expectation };

std::string to_string(PiteMetric m);
PiteMetric pite_metric_from_string(const std::string& s);

struct PiteResult {
  std::vector<double> point;  // posterior mean contrast per individual
  std::vector<double> lower, upper;
  PiteMetric metric = PiteMetric::full_expectation;
  double level = 0.6;
  double ate = 0.0;
};

// Per-draw contrast of the chosen expectation, arm T minus arm C, over the
// common set of individuals (test rows of both draw sets, or train rows when
// neither carries test rows). Bounds are posterior quantiles at
// (1 -/+ level)/2.
PiteResult compute_pite(const PosteriorDraws& arm_t, const PosteriorDraws& arm_c,
                        PiteMetric metric, double level = 0.6);

// Posterior means over draws, one value per row (test rows when use_test).
std::vector<double> posterior_mean_expected_outcome(const PosteriorDraws& d, bool use_test);
std::vector<double> posterior_mean_partial_outcome(const PosteriorDraws& d, bool use_test);
// Posterior mean of the interior Beta mean f_b / (1 + f_b).
std::vector<double> posterior_mean_interior_mean(const PosteriorDraws& d, bool use_test);
// Posterior median of the interior Beta mean; robust to the heavy-tailed
// draw noise that the product-of-trees component carries at large T.
std::vector<double> posterior_median_interior_mean(const PosteriorDraws& d, bool use_test);

struct MetricsReport {
  double mae = 0.0;
  double mse = 0.0;
  double rmse = 0.0;
  double adj_r2 = 0.0;
  bool degenerate = false;  // zero-variance predictions or observations
};

// MAE / MSE / RMSE plus the adjusted R^2 of regressing observed on predicted
// (single predictor with intercept).
MetricsReport compute_metrics(std::span<const double> predicted,
                              std::span<const double> observed);

struct PermTestResult {
  double observed_pite_sd = 0.0;
  std::vector<double> permuted_pite_sds;
  double p_value = 0.0;  // (1 + #{perm >= obs}) / (1 + n_perm)
  double p_raw = 0.0;    // #{perm >= obs} / n_perm
};

// Permutation test for treatment-effect heterogeneity: refits both arms under
// shuffled labels and compares the sd of the PITE point estimates. Fits run
// concurrently with independent substreams; results reduce in permutation
// order.
PermTestResult permutation_test(const Dataset& two_arm, const Hyperparams& h,
                                const Schedule& schedule, PiteMetric metric,
                                std::int32_t n_perm, unsigned n_threads = 0);

// Observed-label PITE machinery shared by the CLI and the permutation test:
// fits each arm on its own rows and predicts the full cohort.
PiteResult fit_and_compute_pite(const Dataset& two_arm, const Hyperparams& h,
                                const Schedule& schedule, PiteMetric metric,
                                double level = 0.6);

}  // namespace hobz

#endif
