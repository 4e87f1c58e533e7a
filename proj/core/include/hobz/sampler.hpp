#ifndef HOBZ_SAMPLER_HPP
#define HOBZ_SAMPLER_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "hobz/dataset.hpp"
#include "hobz/draws.hpp"
#include "hobz/forest.hpp"
#include "hobz/rng.hpp"

namespace hobz {

// Full Gibbs state: the shared forest, the latent probit variables, the Beta
// precision, and cached fits for every train/test row. Caches always equal the
// forest-implied values (refresh-after-update discipline).
struct SamplerState {
  Hyperparams h;
  Forest forest;

  std::vector<double> phi1;  // all rows
  std::vector<double> phi0;  // meaningful on rows with y < 1, 0 elsewhere
  double kappa = 1.0;

  std::vector<double> f1, f0, log_fb;  // train caches
  Matrix test_x;
  std::vector<double> f1_test, f0_test, log_fb_test;

  // Cached row -> leaf maps, one per tree.
  std::vector<std::vector<std::int32_t>> leaf_train, leaf_test;

  std::uint64_t iteration = 0;
  Rng rng;

  // Scratch buffers reused across tree updates.
  struct Workspace {
    std::vector<double> part1, part0, log_eta, eta, resid1, resid0;
    std::vector<double> part1_test, part0_test, log_eta_test;
    std::vector<double> leaf_cnt, leaf_sum;
  } ws;

  SamplerState(const Dataset& data, Matrix test_x, Hyperparams h, std::uint64_t seed);
};

struct ChainDiagnostics {
  std::uint64_t proposed[3] = {0, 0, 0};  // grow, prune, change
  std::uint64_t accepted[3] = {0, 0, 0};
  double mean_leaves = 0.0;   // over kept iterations
  double kappa_mean = 0.0, kappa_sd = 0.0;

  double accept_rate() const {
    const double p = static_cast<double>(proposed[0] + proposed[1] + proposed[2]);
    const double a = static_cast<double>(accepted[0] + accepted[1] + accepted[2]);
    return p > 0 ? a / p : 0.0;
  }
};

// Truncated-normal refresh of the latent probit variables:
// phi1 ~ N(f1, 1) restricted to (0, inf) iff y = 1, else (-inf, 0);
// phi0 (rows y < 1) ~ N(f0, 1) restricted to (0, inf) iff y = 0, else (-inf, 0).
void sample_latent_phi(SamplerState& st, const Dataset& data);

// Backfitting draw of the component-r leaf values of tree t from
// N(N Rbar / (N + s^-2), 1 / (N + s^-2)); refreshes the f_r cache.
void update_theta_leaves(SamplerState& st, const Dataset& data, std::int32_t t, int r);

// Conjugate draw of the lambda leaves of tree t from
// Gamma(kappa N + alpha_g, beta_g - kappa sum eta_i log y_i); refreshes log f_b.
void update_lambda_leaves(SamplerState& st, const Dataset& data, std::int32_t t);

// Slice-sampled kappa from its exact full conditional (exact Beta normalizer
// times the Gamma prior), on the log scale with step-out and shrinkage.
void update_kappa(SamplerState& st, const Dataset& data);

// Posterior parameters behind the conjugate leaf updates, exposed for tests.
std::pair<double, double> theta_leaf_posterior(double n, double mean_resid,
                                               double sigma_theta);  // (mean, var)
std::pair<double, double> lambda_leaf_posterior(const LeafSuffStats& st, double kappa,
                                                const Hyperparams& h);  // (shape, rate)

// One full sweep: per tree, MH structure update followed by phi resampling,
// theta backfitting for both probit components and the lambda leaf update;
// then the kappa update.
void mcmc_iteration(SamplerState& st, const Dataset& data,
                    ChainDiagnostics* diag = nullptr);

// Rebuilds f1/f0/log_fb (train and test) directly from the forest.
void recompute_caches(SamplerState& st, const Dataset& data);

// Draws a topology from the branching-process prior with uniform rules,
// rejecting trees whose leaves would hold fewer than min_leaf_size rows.
// Leaf params are left at defaults.
Tree sample_tree_from_prior(const Dataset& data, const Hyperparams& h, Rng& rng);

// Runs the full chain from the standard initialization (stump trees, kappa
// from its prior, phi from their truncated priors) and records kept draws for
// train rows and optional test rows.
PosteriorDraws run_chain(const Dataset& data, const Matrix* test_x, const Hyperparams& h,
                         const Schedule& schedule, ChainDiagnostics* diag = nullptr);

}  // namespace hobz

#endif
