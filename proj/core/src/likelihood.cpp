#include "hobz/likelihood.hpp"

#include <cmath>

#include "hobz/errors.hpp"
#include "hobz/mathutil.hpp"

namespace hobz {

double probit_leaf_log_marginal(double n, double mean_resid, double sse,
                                double sigma_theta) {
  if (!(sigma_theta > 0.0)) throw ValidationError("probit marginal: sigma_theta <= 0");
  if (n <= 0.0) return 0.0;
  const double s2 = sigma_theta * sigma_theta;
  return -0.5 * n * kLogTwoPi - 0.5 * std::log1p(n * s2) - 0.5 * sse -
         0.5 * n * mean_resid * mean_resid / (n * s2 + 1.0);
}

BetaApproxReport beta_inv_fn(double kappa, double lambda) {
  if (!(kappa > 0.0) || !(lambda > 0.0))
    throw ValidationError("beta_inv_fn: kappa and lambda must be positive");
  BetaApproxReport r;
  r.kappa = kappa;
  r.lambda = lambda;
  const double a = kappa * lambda;
  r.log_exact_inv_b = std::lgamma(a + kappa) - std::lgamma(a) - std::lgamma(kappa);
  r.log_approx_inv_b = kappa * std::log(a) - std::lgamma(kappa);
  r.exact_inv_b = std::exp(r.log_exact_inv_b);
  r.approx_inv_b = std::exp(r.log_approx_inv_b);
  // expm1 on the log difference keeps tiny errors exact.
  const double diff = std::abs(std::expm1(r.log_approx_inv_b - r.log_exact_inv_b));
  r.rel_error = diff;
  r.bound_ratio = std::abs(std::expm1(r.log_exact_inv_b - r.log_approx_inv_b));
  return r;
}

double beta_leaf_log_marginal(const LeafSuffStats& stats, double kappa,
                              double alpha_g, double beta_g) {
  if (!(kappa > 0.0) || !(alpha_g > 0.0) || !(beta_g > 0.0))
    throw ValidationError("beta leaf marginal: nonpositive hyperparameter");
  const double n = stats.n_beta;
  if (n <= 0.0) return 0.0;
  const double rate = beta_g - kappa * stats.s_eta_logy;
  if (!(rate > 0.0)) throw NumericError("beta leaf marginal: nonpositive posterior rate");
  const double per_row = kappa * (n * std::log(kappa) + stats.sum_log_eta) +
                         (kappa - 1.0) * stats.sum_log_1my - stats.sum_log_y -
                         n * std::lgamma(kappa);
  return per_row + alpha_g * std::log(beta_g) - std::lgamma(alpha_g) +
         std::lgamma(kappa * n + alpha_g) - (kappa * n + alpha_g) * std::log(rate);
}

double beta_leaf_log_marginal(std::span<const std::pair<double, double>> y_eta,
                              double kappa, double alpha_g, double beta_g) {
  LeafSuffStats st;
  for (const auto& [y, eta] : y_eta) {
    if (!(y > 0.0 && y < 1.0))
      throw ValidationError("beta leaf marginal: response not in (0,1)");
    if (!(eta > 0.0)) throw ValidationError("beta leaf marginal: eta must be positive");
    st.n_beta += 1.0;
    st.s_eta_logy += eta * std::log(y);
    st.sum_log_eta += std::log(eta);
    st.sum_log_y += std::log(y);
    st.sum_log_1my += std::log1p(-y);
  }
  return beta_leaf_log_marginal(st, kappa, alpha_g, beta_g);
}

double tree_log_posterior(const Tree& tree, const TreeLeafStats& stats,
                          const Hyperparams& h, double kappa) {
  double lp = tree_log_prior(tree, h);
  for (const LeafSuffStats& st : stats.stats) {
    lp += probit_leaf_log_marginal(st.n1, st.mean1(), st.sse1(), h.sigma_theta1);
    lp += probit_leaf_log_marginal(st.n0, st.mean0(), st.sse0(), h.sigma_theta0);
    lp += beta_leaf_log_marginal(st, kappa, h.alpha_g, h.beta_g);
  }
  return lp;
}

}  // namespace hobz
