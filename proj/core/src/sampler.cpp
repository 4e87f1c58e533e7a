#include "hobz/sampler.hpp"

#include <cassert>
#include <cmath>

#include "hobz/errors.hpp"
#include "hobz/likelihood.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/slice.hpp"

namespace hobz {

SamplerState::SamplerState(const Dataset& data, Matrix test, Hyperparams hp,
                           std::uint64_t seed)
    : h(hp), forest(hp.num_trees), test_x(std::move(test)), rng(seed) {
  h.validate();
  if (test_x.n_rows > 0 && test_x.n_cols != data.n_cols())
    throw ValidationError("sampler: test matrix has " + std::to_string(test_x.n_cols) +
                          " columns, train has " + std::to_string(data.n_cols()));
  const std::size_t n = data.n_rows();
  const std::size_t m = test_x.n_rows;
  phi1.assign(n, 0.0);
  phi0.assign(n, 0.0);
  f1.assign(n, 0.0);
  f0.assign(n, 0.0);
  log_fb.assign(n, 0.0);
  f1_test.assign(m, 0.0);
  f0_test.assign(m, 0.0);
  log_fb_test.assign(m, 0.0);
  leaf_train.assign(h.num_trees, std::vector<std::int32_t>(n, 0));
  leaf_test.assign(h.num_trees, std::vector<std::int32_t>(m, 0));
  ws.part1.assign(n, 0.0);
  ws.part0.assign(n, 0.0);
  ws.log_eta.assign(n, 0.0);
  ws.eta.assign(n, 0.0);
  ws.resid1.assign(n, 0.0);
  ws.resid0.assign(n, 0.0);
  ws.part1_test.assign(m, 0.0);
  ws.part0_test.assign(m, 0.0);
  ws.log_eta_test.assign(m, 0.0);

  kappa = rng.gamma(h.alpha_kappa, h.beta_kappa);
  sample_latent_phi(*this, data);
}

void sample_latent_phi(SamplerState& st, const Dataset& data) {
  const std::size_t n = data.n_rows();
  for (std::size_t i = 0; i < n; ++i) {
    st.phi1[i] = data.is_one[i] ? st.rng.truncated_normal_above(st.f1[i], 0.0)
                                : st.rng.truncated_normal_below(st.f1[i], 0.0);
    if (!data.is_one[i]) {
      st.phi0[i] = data.is_zero[i] ? st.rng.truncated_normal_above(st.f0[i], 0.0)
                                   : st.rng.truncated_normal_below(st.f0[i], 0.0);
    }
  }
}

std::pair<double, double> theta_leaf_posterior(double n, double mean_resid,
                                               double sigma_theta) {
  const double prec = n + 1.0 / (sigma_theta * sigma_theta);
  return {n * mean_resid / prec, 1.0 / prec};
}

std::pair<double, double> lambda_leaf_posterior(const LeafSuffStats& st, double kappa,
                                                const Hyperparams& h) {
  const double rate = h.beta_g - kappa * st.s_eta_logy;
  assert(rate > 0.0);
  return {kappa * st.n_beta + h.alpha_g, rate};
}

namespace {

// Draws theta_r for every leaf of `tree` from its full conditional.
void draw_theta(Tree& tree, const TreeLeafStats& stats, int r, const Hyperparams& h,
                Rng& rng) {
  const double sigma = r == 1 ? h.sigma_theta1 : h.sigma_theta0;
  for (std::size_t s = 0; s < stats.leaf_ids.size(); ++s) {
    const LeafSuffStats& ls = stats.stats[s];
    const double n = r == 1 ? ls.n1 : ls.n0;
    const double mean = r == 1 ? ls.mean1() : ls.mean0();
    const auto [m, v] = theta_leaf_posterior(n, mean, sigma);
    const double draw = m + std::sqrt(v) * rng.normal();
    LeafParams& lp = tree.node(stats.leaf_ids[s]).leaf;
    if (r == 1) {
      lp.theta1 = draw;
    } else {
      lp.theta0 = draw;
    }
  }
}

void draw_lambda(Tree& tree, const TreeLeafStats& stats, double kappa,
                 const Hyperparams& h, Rng& rng) {
  for (std::size_t s = 0; s < stats.leaf_ids.size(); ++s) {
    const auto [shape, rate] = lambda_leaf_posterior(stats.stats[s], kappa, h);
    const double lam = rng.gamma(shape, rate);
    tree.node(stats.leaf_ids[s]).leaf.set_mu(std::log(lam));
  }
}

// Fills ws.part*/log_eta/eta/resid* for tree t and the test partials.
void compute_partials(SamplerState& st, const Dataset& data, std::int32_t t) {
  const Tree& tr = st.forest.trees[t];
  const auto& asg = st.leaf_train[t];
  const std::size_t n = data.n_rows();
  for (std::size_t i = 0; i < n; ++i) {
    const LeafParams& lp = tr.node(asg[i]).leaf;
    st.ws.part1[i] = st.f1[i] - lp.theta1;
    st.ws.part0[i] = st.f0[i] - lp.theta0;
    st.ws.log_eta[i] = st.log_fb[i] - lp.mu;
    st.ws.resid1[i] = st.phi1[i] - st.ws.part1[i];
    if (!data.is_one[i]) st.ws.resid0[i] = st.phi0[i] - st.ws.part0[i];
    if (data.is_interior[i]) st.ws.eta[i] = std::exp(st.ws.log_eta[i]);
  }
  const auto& asg_s = st.leaf_test[t];
  for (std::size_t j = 0; j < st.test_x.n_rows; ++j) {
    const LeafParams& lp = tr.node(asg_s[j]).leaf;
    st.ws.part1_test[j] = st.f1_test[j] - lp.theta1;
    st.ws.part0_test[j] = st.f0_test[j] - lp.theta0;
    st.ws.log_eta_test[j] = st.log_fb_test[j] - lp.mu;
  }
}

// One per-tree sweep: MH structure move, then phi / theta / lambda updates.
void tree_block(SamplerState& st, const Dataset& data, std::int32_t t,
                ChainDiagnostics* diag) {
  Tree& tr = st.forest.trees[t];
  auto& asg = st.leaf_train[t];
  const std::size_t n = data.n_rows();

  compute_partials(st, data, t);

  TreeLeafStats stats = leaf_sufficient_stats(tr, data, st.ws.resid1, st.ws.resid0,
                                              st.ws.log_eta, st.ws.eta, asg);

  MoveProposal mp = propose_move(tr, data, st.h, st.rng);
  if (diag) diag->proposed[static_cast<int>(mp.kind)]++;
  if (!mp.auto_rejected) {
    TreeLeafStats prop_stats = leaf_sufficient_stats(
        mp.tree, data, st.ws.resid1, st.ws.resid0, st.ws.log_eta, st.ws.eta);
    const double lp_cur = tree_log_posterior(tr, stats, st.h, st.kappa);
    const double lp_prop = tree_log_posterior(mp.tree, prop_stats, st.h, st.kappa);
    const double log_accept = lp_prop - lp_cur + mp.log_transition_ratio;
    if (std::log(st.rng.uniform_pos()) < log_accept) {
      tr = std::move(mp.tree);
      for (std::size_t i = 0; i < n; ++i) asg[i] = tr.assign_leaf(data.x.row(i));
      auto& asg_s = st.leaf_test[t];
      for (std::size_t j = 0; j < st.test_x.n_rows; ++j)
        asg_s[j] = tr.assign_leaf(st.test_x.row(j));
      stats = std::move(prop_stats);
      // Fresh conditional draws define the leaf params of the new topology
      // before anything reads them. Lambda is redrawn below regardless.
      draw_theta(tr, stats, 1, st.h, st.rng);
      draw_theta(tr, stats, 0, st.h, st.rng);
      if (diag) diag->accepted[static_cast<int>(mp.kind)]++;
    }
  }

  auto& cnt = st.ws.leaf_cnt;
  auto& sum = st.ws.leaf_sum;
  const std::size_t n_slots = stats.leaf_ids.size();

  // Component r = 1: resample phi1, then backfit theta1.
  cnt.assign(n_slots, 0.0);
  sum.assign(n_slots, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double fit = st.ws.part1[i] + tr.node(asg[i]).leaf.theta1;
    st.phi1[i] = data.is_one[i] ? st.rng.truncated_normal_above(fit, 0.0)
                                : st.rng.truncated_normal_below(fit, 0.0);
    const std::int32_t slot = stats.slot_of_node[asg[i]];
    cnt[slot] += 1.0;
    sum[slot] += st.phi1[i] - st.ws.part1[i];
  }
  for (std::size_t s = 0; s < n_slots; ++s) {
    const double mean = cnt[s] > 0 ? sum[s] / cnt[s] : 0.0;
    const auto [m, v] = theta_leaf_posterior(cnt[s], mean, st.h.sigma_theta1);
    tr.node(stats.leaf_ids[s]).leaf.theta1 = m + std::sqrt(v) * st.rng.normal();
  }
  for (std::size_t i = 0; i < n; ++i)
    st.f1[i] = st.ws.part1[i] + tr.node(asg[i]).leaf.theta1;

  // Component r = 0 over rows with y < 1; y = 1 rows keep their phi0 and do
  // not enter the leaf statistics.
  cnt.assign(n_slots, 0.0);
  sum.assign(n_slots, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (data.is_one[i]) continue;
    const double fit = st.ws.part0[i] + tr.node(asg[i]).leaf.theta0;
    st.phi0[i] = data.is_zero[i] ? st.rng.truncated_normal_above(fit, 0.0)
                                 : st.rng.truncated_normal_below(fit, 0.0);
    const std::int32_t slot = stats.slot_of_node[asg[i]];
    cnt[slot] += 1.0;
    sum[slot] += st.phi0[i] - st.ws.part0[i];
  }
  for (std::size_t s = 0; s < n_slots; ++s) {
    const double mean = cnt[s] > 0 ? sum[s] / cnt[s] : 0.0;
    const auto [m, v] = theta_leaf_posterior(cnt[s], mean, st.h.sigma_theta0);
    tr.node(stats.leaf_ids[s]).leaf.theta0 = m + std::sqrt(v) * st.rng.normal();
  }
  for (std::size_t i = 0; i < n; ++i)
    st.f0[i] = st.ws.part0[i] + tr.node(asg[i]).leaf.theta0;

  // Lambda leaves: eta and y were untouched above, so the Beta sufficient
  // statistics from the MH step are still current.
  draw_lambda(tr, stats, st.kappa, st.h, st.rng);
  for (std::size_t i = 0; i < n; ++i)
    st.log_fb[i] = st.ws.log_eta[i] + tr.node(asg[i]).leaf.mu;

  const auto& asg_s = st.leaf_test[t];
  for (std::size_t j = 0; j < st.test_x.n_rows; ++j) {
    const LeafParams& lp = tr.node(asg_s[j]).leaf;
    st.f1_test[j] = st.ws.part1_test[j] + lp.theta1;
    st.f0_test[j] = st.ws.part0_test[j] + lp.theta0;
    st.log_fb_test[j] = st.ws.log_eta_test[j] + lp.mu;
  }
}

}  // namespace

void update_theta_leaves(SamplerState& st, const Dataset& data, std::int32_t t, int r) {
  if (r != 0 && r != 1) throw ValidationError("update_theta_leaves: r must be 0 or 1");
  Tree& tr = st.forest.trees[t];
  const auto& asg = st.leaf_train[t];
  compute_partials(st, data, t);
  TreeLeafStats stats = leaf_sufficient_stats(tr, data, st.ws.resid1, st.ws.resid0,
                                              st.ws.log_eta, st.ws.eta, asg);
  draw_theta(tr, stats, r, st.h, st.rng);
  const std::size_t n = data.n_rows();
  if (r == 1) {
    for (std::size_t i = 0; i < n; ++i)
      st.f1[i] = st.ws.part1[i] + tr.node(asg[i]).leaf.theta1;
    for (std::size_t j = 0; j < st.test_x.n_rows; ++j)
      st.f1_test[j] = st.ws.part1_test[j] + tr.node(st.leaf_test[t][j]).leaf.theta1;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      st.f0[i] = st.ws.part0[i] + tr.node(asg[i]).leaf.theta0;
    for (std::size_t j = 0; j < st.test_x.n_rows; ++j)
      st.f0_test[j] = st.ws.part0_test[j] + tr.node(st.leaf_test[t][j]).leaf.theta0;
  }
}

void update_lambda_leaves(SamplerState& st, const Dataset& data, std::int32_t t) {
  Tree& tr = st.forest.trees[t];
  const auto& asg = st.leaf_train[t];
  compute_partials(st, data, t);
  TreeLeafStats stats = leaf_sufficient_stats(tr, data, st.ws.resid1, st.ws.resid0,
                                              st.ws.log_eta, st.ws.eta, asg);
  draw_lambda(tr, stats, st.kappa, st.h, st.rng);
  for (std::size_t i = 0; i < data.n_rows(); ++i)
    st.log_fb[i] = st.ws.log_eta[i] + tr.node(asg[i]).leaf.mu;
  for (std::size_t j = 0; j < st.test_x.n_rows; ++j)
    st.log_fb_test[j] = st.ws.log_eta_test[j] + tr.node(st.leaf_test[t][j]).leaf.mu;
}

void update_kappa(SamplerState& st, const Dataset& data) {
  const std::size_t n = data.n_rows();
  // Gather interior rows once; the slice evaluations reuse them.
  std::vector<double> fb, ly;
  fb.reserve(data.n_interior);
  ly.reserve(data.n_interior);
  double sum_l1my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data.is_interior[i]) continue;
    fb.push_back(std::exp(st.log_fb[i]));
    ly.push_back(data.log_y[i]);
    sum_l1my += data.log_1my[i];
  }
  if (fb.empty()) {
    st.kappa = st.rng.gamma(st.h.alpha_kappa, st.h.beta_kappa);
    return;
  }
  double c1 = sum_l1my;
  double sum_log_fb = 0.0;
  for (std::size_t i = 0; i < fb.size(); ++i) {
    c1 += fb[i] * ly[i];
    sum_log_fb += std::log(fb[i]);
  }
  const double n_int = static_cast<double>(fb.size());
  const Hyperparams& h = st.h;

  // Log target in u = log kappa, prior and Jacobian included.
  auto logpdf = [&](double u) {
    if (u > 40.0 || u < -40.0) return -std::numeric_limits<double>::infinity();
    const double k = std::exp(u);
    double s = 0.0;
    if (h.kappa_exact) {
      for (std::size_t i = 0; i < fb.size(); ++i)
        s += std::lgamma(k * (fb[i] + 1.0)) - std::lgamma(k * fb[i]);
    } else {
      s += k * (n_int * std::log(k) + sum_log_fb);
    }
    s += -n_int * std::lgamma(k) + k * c1;
    s += h.alpha_kappa * u - h.beta_kappa * k;
    return s;
  };
  const double u1 = slice_sample(std::log(st.kappa), logpdf, 1.0, 50, st.rng);
  st.kappa = std::exp(u1);
}

void mcmc_iteration(SamplerState& st, const Dataset& data, ChainDiagnostics* diag) {
  for (std::int32_t t = 0; t < st.h.num_trees; ++t) tree_block(st, data, t, diag);
  update_kappa(st, data);
  ++st.iteration;
}

void recompute_caches(SamplerState& st, const Dataset& data) {
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    const auto row = data.x.row(i);
    st.f1[i] = st.forest.f1(row);
    st.f0[i] = st.forest.f0(row);
    st.log_fb[i] = st.forest.log_fb(row);
  }
  for (std::size_t j = 0; j < st.test_x.n_rows; ++j) {
    const auto row = st.test_x.row(j);
    st.f1_test[j] = st.forest.f1(row);
    st.f0_test[j] = st.forest.f0(row);
    st.log_fb_test[j] = st.forest.log_fb(row);
  }
  for (std::int32_t t = 0; t < st.h.num_trees; ++t) {
    const Tree& tr = st.forest.trees[t];
    for (std::size_t i = 0; i < data.n_rows(); ++i)
      st.leaf_train[t][i] = tr.assign_leaf(data.x.row(i));
    for (std::size_t j = 0; j < st.test_x.n_rows; ++j)
      st.leaf_test[t][j] = tr.assign_leaf(st.test_x.row(j));
  }
}

Tree sample_tree_from_prior(const Dataset& data, const Hyperparams& h, Rng& rng) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    Tree tree;
    bool overflow = false;
    // Breadth-first growth of the branching process.
    std::vector<std::int32_t> frontier{0};
    while (!frontier.empty() && !overflow) {
      std::vector<std::int32_t> next;
      for (std::int32_t id : frontier) {
        const double p_split =
            h.tree_alpha * std::pow(1.0 + tree.node(id).depth, -h.tree_beta);
        if (rng.uniform() < p_split) {
          if (tree.size() > 4096) {
            overflow = true;
            break;
          }
          SplitRule rule;
          rule.covariate = static_cast<std::int32_t>(rng.uniform_int(data.n_cols()));
          rule.cutpoint = data.x.at(rng.uniform_int(data.n_rows()), rule.covariate);
          tree.grow(id, rule);
          next.push_back(tree.node(id).left);
          next.push_back(tree.node(id).right);
        }
      }
      frontier = std::move(next);
    }
    if (overflow) continue;
    // Whole-tree rejection keeps the restricted support exact.
    std::vector<std::int32_t> count(tree.size(), 0);
    for (std::size_t i = 0; i < data.n_rows(); ++i)
      count[tree.assign_leaf(data.x.row(i))]++;
    bool ok = true;
    for (std::int32_t id : tree.collect_leaves())
      if (count[id] < h.min_leaf_size) {
        ok = false;
        break;
      }
    if (ok) return tree;
  }
  throw NumericError("sample_tree_from_prior: rejection did not terminate");
}

PosteriorDraws run_chain(const Dataset& data, const Matrix* test_x, const Hyperparams& h,
                         const Schedule& schedule, ChainDiagnostics* diag) {
  schedule.validate();
  h.validate();

  SamplerState st(data, test_x ? *test_x : Matrix{}, h, schedule.seed);

  PosteriorDraws out;
  out.n_train = static_cast<std::uint32_t>(data.n_rows());
  out.n_test = static_cast<std::uint32_t>(st.test_x.n_rows);
  out.num_draws = static_cast<std::uint32_t>(schedule.num_kept());
  out.iterations = schedule.iterations;
  out.burn_in = schedule.burn_in;
  out.thin = schedule.thin;
  out.num_trees = h.num_trees;
  out.seed = schedule.seed;
  out.kappa.reserve(out.num_draws);
  out.f1_train.reserve(static_cast<std::size_t>(out.num_draws) * out.n_train);
  out.f0_train.reserve(static_cast<std::size_t>(out.num_draws) * out.n_train);
  out.fb_train.reserve(static_cast<std::size_t>(out.num_draws) * out.n_train);
  out.f1_test.reserve(static_cast<std::size_t>(out.num_draws) * out.n_test);
  out.f0_test.reserve(static_cast<std::size_t>(out.num_draws) * out.n_test);
  out.fb_test.reserve(static_cast<std::size_t>(out.num_draws) * out.n_test);

  double leaves_acc = 0.0;
  std::uint64_t leaves_n = 0;
  double k_sum = 0.0, k_sumsq = 0.0;

  for (std::int32_t it = 0; it < schedule.iterations; ++it) {
    mcmc_iteration(st, data, diag);
    if (it < schedule.burn_in || (it - schedule.burn_in) % schedule.thin != 0) continue;
    out.kappa.push_back(st.kappa);
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
      out.f1_train.push_back(st.f1[i]);
      out.f0_train.push_back(st.f0[i]);
      out.fb_train.push_back(std::exp(st.log_fb[i]));
    }
    for (std::size_t j = 0; j < st.test_x.n_rows; ++j) {
      out.f1_test.push_back(st.f1_test[j]);
      out.f0_test.push_back(st.f0_test[j]);
      out.fb_test.push_back(std::exp(st.log_fb_test[j]));
    }
    k_sum += st.kappa;
    k_sumsq += st.kappa * st.kappa;
    for (const Tree& t : st.forest.trees) leaves_acc += static_cast<double>(t.num_leaves());
    leaves_n += st.forest.trees.size();
  }

  if (diag && out.num_draws > 0) {
    const double l = static_cast<double>(out.num_draws);
    diag->mean_leaves = leaves_acc / static_cast<double>(leaves_n);
    diag->kappa_mean = k_sum / l;
    const double var = k_sumsq / l - diag->kappa_mean * diag->kappa_mean;
    diag->kappa_sd = var > 0 ? std::sqrt(var) : 0.0;
  }
  return out;
}

}  // namespace hobz
