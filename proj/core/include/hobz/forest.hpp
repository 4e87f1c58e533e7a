#ifndef HOBZ_FOREST_HPP
#define HOBZ_FOREST_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "hobz/dataset.hpp"
#include "hobz/rng.hpp"

namespace hobz {

struct SplitRule {
  std::int32_t covariate = -1;
  double cutpoint = 0.0;
};

// Leaf payload for the shared forest: the two probit contributions plus the
// log-scale interior-mean contribution (lambda = exp(mu) kept in sync).
struct LeafParams {
  double theta1 = 0.0;
  double theta0 = 0.0;
  double mu = 0.0;
  double lambda = 1.0;

  void set_mu(double m);
};

struct TreeNode {
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::int32_t depth = 0;
  SplitRule rule;
  LeafParams leaf;  // meaningful only when is_leaf()

  bool is_leaf() const { return left < 0; }
};

// Binary regression tree stored as an index arena; node 0 is the root.
// Value semantics keep propose/reject cheap.
class Tree {
 public:
  Tree() : nodes_(1) {}

  std::size_t size() const { return nodes_.size(); }
  const TreeNode& node(std::int32_t id) const { return nodes_[id]; }
  TreeNode& node(std::int32_t id) { return nodes_[id]; }
  bool is_stump() const { return nodes_.size() == 1 || nodes_[0].is_leaf(); }

  // Descends from the root; left when x[j] <= c.
  std::int32_t assign_leaf(std::span<const double> row) const;

  std::vector<std::int32_t> collect_leaves() const;     // DFS preorder
  std::vector<std::int32_t> collect_internal() const;   // DFS preorder
  // Internal nodes whose children are both leaves (PRUNE candidates).
  std::vector<std::int32_t> collect_prunable() const;
  std::size_t num_leaves() const;

  // Splits `leaf_id` with `rule`; children inherit the leaf params.
  void grow(std::int32_t leaf_id, const SplitRule& rule);
  // Collapses a prunable internal node back to a leaf.
  void prune(std::int32_t node_id);
  // Replaces the rule at an internal node.
  void change(std::int32_t node_id, const SplitRule& rule);
  // Rebuilds the arena without orphaned slots (after prune).
  void compact();

  bool well_formed() const;

 private:
  std::vector<TreeNode> nodes_;
};

struct Hyperparams {
  std::int32_t num_trees = 100;
  double tree_alpha = 0.95;
  double tree_beta = 2.0;
  double sigma_theta1 = 0.15;
  double sigma_theta0 = 0.15;
  double alpha_g = 0.5;   // lambda leaf prior shape
  double beta_g = 0.15;   // lambda leaf prior rate
  double alpha_kappa = 1.0;
  double beta_kappa = 2.0;
  double p_grow = 0.3;
  double p_prune = 0.3;
  double p_change = 0.4;
  std::int32_t min_leaf_size = 1;
  // Exact Beta normalizer in the kappa full conditional (the estimation
  // default). With false, kappa uses the same large-lambda approximation as
  // the tree and lambda updates, so every conditional targets one coherent
  // joint; the joint-distribution test relies on that variant.
  bool kappa_exact = true;

  // sigma_theta = 3 / (k sqrt(T)), the usual probit calibration.
  static Hyperparams defaults(std::int32_t num_trees = 100, double k = 2.0);
  void validate() const;
};

// Per-leaf sufficient statistics for the three likelihood components.
// Probit parts store raw sums; accessors give mean / SSE.
struct LeafSuffStats {
  double n1 = 0, sum1 = 0, sumsq1 = 0;          // component r=1 (all rows)
  double n0 = 0, sum0 = 0, sumsq0 = 0;          // component r=0 (rows y<1)
  double n_beta = 0;                            // interior rows
  double s_eta_logy = 0;                        // sum eta_i * log y_i (<= 0)
  double sum_log_eta = 0;
  double sum_log_y = 0;
  double sum_log_1my = 0;

  double mean1() const { return n1 > 0 ? sum1 / n1 : 0.0; }
  double mean0() const { return n0 > 0 ? sum0 / n0 : 0.0; }
  double sse1() const;
  double sse0() const;
};

// Stats for every leaf of one tree, in collect_leaves() order.
struct TreeLeafStats {
  std::vector<std::int32_t> leaf_ids;
  std::vector<LeafSuffStats> stats;
  std::vector<std::int32_t> slot_of_node;  // node id -> slot, -1 otherwise

  const LeafSuffStats& of_node(std::int32_t node_id) const {
    return stats[slot_of_node[node_id]];
  }
};

// Accumulates leaf stats in one pass. resid1 has one entry per row; resid0 is
// read only where y < 1; log_eta/eta only on interior rows. Rows with y = 1
// never touch the r=0 or Beta parts. `assignment` may be empty (computed on
// the fly) or a cached row->leaf map for this tree.
TreeLeafStats leaf_sufficient_stats(const Tree& tree, const Dataset& data,
                                    std::span<const double> resid1,
                                    std::span<const double> resid0,
                                    std::span<const double> log_eta,
                                    std::span<const double> eta,
                                    std::span<const std::int32_t> assignment = {});

// log pi(T): depth-penalized branching-process prior over the topology.
// Split-rule selection probabilities are excluded; they cancel against the
// uniform rule proposal in every MH ratio.
double tree_log_prior(const Tree& tree, const Hyperparams& h);

enum class MoveKind { grow, prune, change };

struct MoveProposal {
  MoveKind kind = MoveKind::grow;
  Tree tree;
  double log_transition_ratio = 0.0;  // log q(T'->T) - log q(T->T')
  bool auto_rejected = false;         // violates min_leaf_size
};

// Draws GROW / PRUNE / CHANGE with the configured probabilities. PRUNE and
// CHANGE degrade to GROW on a stump. Cutpoints are drawn uniformly from the
// observed values of a uniformly chosen covariate. Proposals leaving any leaf
// with fewer than min_leaf_size training rows come back auto_rejected.
MoveProposal propose_move(const Tree& tree, const Dataset& data, const Hyperparams& h,
                          Rng& rng);

// The shared ensemble. f1/f0 are sums of theta leaves, log f_b the sum of mu.
struct Forest {
  std::vector<Tree> trees;

  explicit Forest(std::int32_t num_trees = 0) : trees(num_trees) {}

  double f1(std::span<const double> row) const;
  double f0(std::span<const double> row) const;
  double log_fb(std::span<const double> row) const;
};

}  // namespace hobz

#endif
