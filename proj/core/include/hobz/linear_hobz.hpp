#ifndef HOBZ_LINEAR_HOBZ_HPP
#define HOBZ_LINEAR_HOBZ_HPP

#include "hobz/dataset.hpp"
#include "hobz/draws.hpp"

namespace hobz {

struct LinearHobzDiagnostics {
  double mu_accept_rate = 0.0;
  std::vector<double> beta_alpha_mean, beta_gamma_mean, beta_mu_mean;
  std::vector<double> beta_alpha_sd, beta_gamma_sd, beta_mu_sd;
};

// Sequential-hurdle baseline with linear predictors on [1 | X]: probit parts
// by truncated-normal augmentation with conjugate Gaussian coefficient
// updates, interior mean by log-linear coefficients under random-walk MH
// against the approximate Beta likelihood, kappa by the shared slice sampler.
// Emits draws interchangeable with the tree engine. Rank-deficient designs
// are rejected.
PosteriorDraws fit_linear_hobz(const Dataset& data, const Matrix* test_x,
                               const Schedule& schedule, double prior_sd = 10.0,
                               LinearHobzDiagnostics* diag = nullptr);

}  // namespace hobz

#endif
