#include "hobz/forest.hpp"

#include <cmath>
#include <limits>

#include "hobz/errors.hpp"

namespace hobz {

void LeafParams::set_mu(double m) {
  mu = m;
  lambda = std::exp(m);
}

std::int32_t Tree::assign_leaf(std::span<const double> row) const {
  std::int32_t id = 0;
  while (!nodes_[id].is_leaf()) {
    const auto& nd = nodes_[id];
    id = row[nd.rule.covariate] <= nd.rule.cutpoint ? nd.left : nd.right;
  }
  return id;
}

std::vector<std::int32_t> Tree::collect_leaves() const {
  std::vector<std::int32_t> out, stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    if (nodes_[id].is_leaf()) {
      out.push_back(id);
    } else {
      stack.push_back(nodes_[id].right);
      stack.push_back(nodes_[id].left);
    }
  }
  return out;
}

std::vector<std::int32_t> Tree::collect_internal() const {
  std::vector<std::int32_t> out, stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    if (!nodes_[id].is_leaf()) {
      out.push_back(id);
      stack.push_back(nodes_[id].right);
      stack.push_back(nodes_[id].left);
    }
  }
  return out;
}

std::vector<std::int32_t> Tree::collect_prunable() const {
  std::vector<std::int32_t> out;
  for (std::int32_t id : collect_internal()) {
    if (nodes_[nodes_[id].left].is_leaf() && nodes_[nodes_[id].right].is_leaf())
      out.push_back(id);
  }
  return out;
}

std::size_t Tree::num_leaves() const { return collect_leaves().size(); }

void Tree::grow(std::int32_t leaf_id, const SplitRule& rule) {
  TreeNode& nd = nodes_[leaf_id];
  if (!nd.is_leaf()) throw NumericError("grow: target is not a leaf");
  TreeNode child;
  child.depth = nd.depth + 1;
  child.leaf = nd.leaf;
  const std::int32_t l = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(child);
  nodes_.push_back(child);
  nodes_[leaf_id].left = l;
  nodes_[leaf_id].right = l + 1;
  nodes_[leaf_id].rule = rule;
}

void Tree::prune(std::int32_t node_id) {
  TreeNode& nd = nodes_[node_id];
  if (nd.is_leaf() || !nodes_[nd.left].is_leaf() || !nodes_[nd.right].is_leaf())
    throw NumericError("prune: node is not prunable");
  nd.leaf = nodes_[nd.left].leaf;  // placeholder; redrawn by the sampler
  nd.left = nd.right = -1;
  nd.rule = SplitRule{};
}

void Tree::change(std::int32_t node_id, const SplitRule& rule) {
  if (nodes_[node_id].is_leaf()) throw NumericError("change: node is a leaf");
  nodes_[node_id].rule = rule;
}

void Tree::compact() {
  std::vector<TreeNode> fresh;
  fresh.reserve(nodes_.size());
  // Preorder copy with index remapping.
  std::vector<std::int32_t> remap(nodes_.size(), -1);
  std::vector<std::int32_t> order, st2{0};
  while (!st2.empty()) {
    const std::int32_t id = st2.back();
    st2.pop_back();
    order.push_back(id);
    if (!nodes_[id].is_leaf()) {
      st2.push_back(nodes_[id].right);
      st2.push_back(nodes_[id].left);
    }
  }
  for (std::int32_t id : order) {
    remap[id] = static_cast<std::int32_t>(fresh.size());
    fresh.push_back(nodes_[id]);
  }
  for (auto& nd : fresh) {
    if (!nd.is_leaf()) {
      nd.left = remap[nd.left];
      nd.right = remap[nd.right];
    }
  }
  nodes_ = std::move(fresh);
}

bool Tree::well_formed() const {
  if (nodes_.empty()) return false;
  std::vector<std::int32_t> stack{0};
  std::size_t seen = 0;
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    if (id < 0 || id >= static_cast<std::int32_t>(nodes_.size())) return false;
    ++seen;
    const TreeNode& nd = nodes_[id];
    if (!nd.is_leaf()) {
      if (nd.right < 0 || nd.rule.covariate < 0) return false;
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    } else if (nd.right >= 0) {
      return false;
    }
  }
  return seen <= nodes_.size();
}

Hyperparams Hyperparams::defaults(std::int32_t num_trees, double k) {
  Hyperparams h;
  h.num_trees = num_trees;
  h.sigma_theta1 = 3.0 / (k * std::sqrt(static_cast<double>(num_trees)));
  h.sigma_theta0 = h.sigma_theta1;
  return h;
}

void Hyperparams::validate() const {
  if (num_trees <= 0) throw ValidationError("hyperparams: num_trees must be positive");
  if (!(tree_alpha > 0.0 && tree_alpha < 1.0))
    throw ValidationError("hyperparams: tree_alpha must lie in (0,1)");
  if (!(tree_beta >= 0.0)) throw ValidationError("hyperparams: tree_beta must be >= 0");
  if (!(sigma_theta1 > 0.0 && sigma_theta0 > 0.0))
    throw ValidationError("hyperparams: probit leaf prior sds must be positive");
  if (!(alpha_g > 0.0 && beta_g > 0.0 && alpha_kappa > 0.0 && beta_kappa > 0.0))
    throw ValidationError("hyperparams: gamma hyperparameters must be positive");
  const double s = p_grow + p_prune + p_change;
  if (!(p_grow >= 0.0 && p_prune >= 0.0 && p_change >= 0.0) || std::abs(s - 1.0) > 1e-12)
    throw ValidationError("hyperparams: move probabilities must be nonnegative and sum to 1");
  if (min_leaf_size < 1) throw ValidationError("hyperparams: min_leaf_size must be >= 1");
}

double LeafSuffStats::sse1() const {
  if (n1 <= 0) return 0.0;
  const double s = sumsq1 - sum1 * sum1 / n1;
  return s > 0.0 ? s : 0.0;
}

double LeafSuffStats::sse0() const {
  if (n0 <= 0) return 0.0;
  const double s = sumsq0 - sum0 * sum0 / n0;
  return s > 0.0 ? s : 0.0;
}

TreeLeafStats leaf_sufficient_stats(const Tree& tree, const Dataset& data,
                                    std::span<const double> resid1,
                                    std::span<const double> resid0,
                                    std::span<const double> log_eta,
                                    std::span<const double> eta,
                                    std::span<const std::int32_t> assignment) {
  TreeLeafStats out;
  out.leaf_ids = tree.collect_leaves();
  out.stats.assign(out.leaf_ids.size(), LeafSuffStats{});
  out.slot_of_node.assign(tree.size(), -1);
  for (std::size_t s = 0; s < out.leaf_ids.size(); ++s)
    out.slot_of_node[out.leaf_ids[s]] = static_cast<std::int32_t>(s);

  const std::size_t n = data.n_rows();
  for (std::size_t i = 0; i < n; ++i) {
    const std::int32_t leaf =
        assignment.empty() ? tree.assign_leaf(data.x.row(i)) : assignment[i];
    LeafSuffStats& st = out.stats[out.slot_of_node[leaf]];
    const double r1 = resid1[i];
    st.n1 += 1.0;
    st.sum1 += r1;
    st.sumsq1 += r1 * r1;
    if (data.is_one[i]) continue;  // y = 1 rows are excluded below the first hurdle
    const double r0 = resid0[i];
    st.n0 += 1.0;
    st.sum0 += r0;
    st.sumsq0 += r0 * r0;
    if (!data.is_interior[i]) continue;
    st.n_beta += 1.0;
    st.s_eta_logy += eta[i] * data.log_y[i];
    st.sum_log_eta += log_eta[i];
    st.sum_log_y += data.log_y[i];
    st.sum_log_1my += data.log_1my[i];
  }
  return out;
}

double tree_log_prior(const Tree& tree, const Hyperparams& h) {
  double lp = 0.0;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t id = stack.back();
    stack.pop_back();
    const TreeNode& nd = tree.node(id);
    const double p_split = h.tree_alpha * std::pow(1.0 + nd.depth, -h.tree_beta);
    if (nd.is_leaf()) {
      lp += std::log1p(-p_split);
    } else {
      lp += std::log(p_split);
      stack.push_back(nd.left);
      stack.push_back(nd.right);
    }
  }
  return lp;
}

namespace {

SplitRule draw_rule(const Dataset& data, Rng& rng) {
  SplitRule rule;
  rule.covariate = static_cast<std::int32_t>(rng.uniform_int(data.n_cols()));
  rule.cutpoint = data.x.at(rng.uniform_int(data.n_rows()), rule.covariate);
  return rule;
}

// Every leaf of `tree` must hold at least min_leaf training rows.
bool satisfies_min_leaf(const Tree& tree, const Dataset& data, std::int32_t min_leaf) {
  std::vector<std::int32_t> count(tree.size(), 0);
  for (std::size_t i = 0; i < data.n_rows(); ++i) count[tree.assign_leaf(data.x.row(i))]++;
  for (std::int32_t id : tree.collect_leaves())
    if (count[id] < min_leaf) return false;
  return true;
}

}  // namespace

MoveProposal propose_move(const Tree& tree, const Dataset& data, const Hyperparams& h,
                          Rng& rng) {
  MoveProposal mp;
  mp.tree = tree;

  const bool stump = tree.is_stump();
  MoveKind kind = MoveKind::grow;
  if (!stump) {
    const double u = rng.uniform();
    kind = u < h.p_grow               ? MoveKind::grow
           : u < h.p_grow + h.p_prune ? MoveKind::prune
                                      : MoveKind::change;
  }
  mp.kind = kind;

  if (data.n_rows() == 0 || data.n_cols() == 0) {
    // No rows can satisfy min_leaf_size and no rule pool exists; only the
    // stump is reachable.
    mp.auto_rejected = true;
    return mp;
  }

  const double p_grow_here = stump ? 1.0 : h.p_grow;

  if (kind == MoveKind::grow) {
    const auto leaves = mp.tree.collect_leaves();
    const std::int32_t target =
        leaves[rng.uniform_int(leaves.size())];
    mp.tree.grow(target, draw_rule(data, rng));
    if (!satisfies_min_leaf(mp.tree, data, h.min_leaf_size)) {
      mp.auto_rejected = true;
      return mp;
    }
    // forward: pick leaf (1/b); reverse: PRUNE picks the new node among w'.
    const double w_new = static_cast<double>(mp.tree.collect_prunable().size());
    mp.log_transition_ratio = std::log(h.p_prune) - std::log(w_new) -
                              (std::log(p_grow_here) - std::log(static_cast<double>(leaves.size())));
    return mp;
  }

  if (kind == MoveKind::prune) {
    const auto prunable = mp.tree.collect_prunable();
    const std::int32_t target = prunable[rng.uniform_int(prunable.size())];
    mp.tree.prune(target);
    mp.tree.compact();
    // Merging leaves cannot shrink any leaf below min_leaf_size.
    const double b_new = static_cast<double>(mp.tree.num_leaves());
    const double p_grow_rev = mp.tree.is_stump() ? 1.0 : h.p_grow;
    mp.log_transition_ratio = std::log(p_grow_rev) - std::log(b_new) -
                              (std::log(h.p_prune) - std::log(static_cast<double>(prunable.size())));
    return mp;
  }

  // CHANGE: symmetric under the shared rule pool; ratio is zero.
  const auto internal = mp.tree.collect_internal();
  const std::int32_t target = internal[rng.uniform_int(internal.size())];
  mp.tree.change(target, draw_rule(data, rng));
  if (!satisfies_min_leaf(mp.tree, data, h.min_leaf_size)) {
    mp.auto_rejected = true;
    return mp;
  }
  mp.log_transition_ratio = 0.0;
  return mp;
}

double Forest::f1(std::span<const double> row) const {
  double s = 0.0;
  for (const Tree& t : trees) s += t.node(t.assign_leaf(row)).leaf.theta1;
  return s;
}

double Forest::f0(std::span<const double> row) const {
  double s = 0.0;
  for (const Tree& t : trees) s += t.node(t.assign_leaf(row)).leaf.theta0;
  return s;
}

double Forest::log_fb(std::span<const double> row) const {
  double s = 0.0;
  for (const Tree& t : trees) s += t.node(t.assign_leaf(row)).leaf.mu;
  return s;
}

}  // namespace hobz
