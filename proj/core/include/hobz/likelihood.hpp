#ifndef HOBZ_LIKELIHOOD_HPP
#define HOBZ_LIKELIHOOD_HPP

#include <span>
#include <utility>

#include "hobz/forest.hpp"

namespace hobz {

// log of the probit leaf marginal
//   L = (2pi)^{-N/2} sqrt(1/(1+N s^2)) exp(-SSE/2 - N Rbar^2 / (2 (N s^2 + 1)))
// with s = sigma_theta. Empty leaves give exactly 0.
double probit_leaf_log_marginal(double n, double mean_resid, double sse,
                                double sigma_theta);

// Inverse Beta-function report: exact 1/B(kappa lambda, kappa) against the
// large-lambda approximation (kappa lambda)^kappa / Gamma(kappa).
struct BetaApproxReport {
  double kappa = 0.0;
  double lambda = 0.0;
  double log_exact_inv_b = 0.0;
  double log_approx_inv_b = 0.0;
  double exact_inv_b = 0.0;
  double approx_inv_b = 0.0;
  double rel_error = 0.0;    // |exact - approx| / exact
  double bound_ratio = 0.0;  // |exact - approx| / approx; lambda * bound_ratio is O(1)
};

BetaApproxReport beta_inv_fn(double kappa, double lambda);

// log of the integrated Beta leaf likelihood (leaf lambda marginalized against
// its Gamma(alpha_g, beta_g) prior under the approximate Beta normalizer):
//   prod_i [(k eta_i)^k (1-y_i)^{k-1} / (Gamma(k) y_i)]
//   * beta_g^alpha_g / Gamma(alpha_g)
//   * Gamma(k N + alpha_g) / (beta_g - k S)^{k N + alpha_g},
// S = sum_i eta_i log y_i. Entirely log-space; N = 0 gives exactly 0.
double beta_leaf_log_marginal(const LeafSuffStats& stats, double kappa,
                              double alpha_g, double beta_g);

// Convenience overload that builds the stats from explicit interior rows.
double beta_leaf_log_marginal(std::span<const std::pair<double, double>> y_eta,
                              double kappa, double alpha_g, double beta_g);

// log pi(T | .) up to rule-selection constants: tree prior plus the product of
// the three per-leaf integrated likelihoods. Stats must have been computed
// against the partial fits excluding this tree.
double tree_log_posterior(const Tree& tree, const TreeLeafStats& stats,
                          const Hyperparams& h, double kappa);

}  // namespace hobz

#endif
