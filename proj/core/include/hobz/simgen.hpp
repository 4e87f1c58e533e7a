#ifndef HOBZ_SIMGEN_HPP
#define HOBZ_SIMGEN_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hobz/dataset.hpp"
#include "hobz/rng.hpp"

namespace hobz {

struct ExpansionSpec {
  std::int32_t base_dim = 6;
  std::int32_t select_k = 15;
};

enum class GenKind { linear, nonlinear };

// Configuration of the sequential-hurdle generator. Coefficient vectors have
// one entry per design column plus a leading intercept. With an expansion the
// design is the selected interaction columns; the emitted covariates are the
// base columns (the models never see the interactions).
struct SimConfig {
  std::string name = "custom";
  std::int32_t n = 500;
  std::int32_t p_base = 5;
  std::vector<double> sigma;  // p_base x p_base covariance; empty = identity
  std::vector<double> beta_alpha;  // mass-at-one, probit scale
  std::vector<double> beta_gamma;  // mass-at-zero given y<1
  std::vector<double> beta_mu;     // interior mean, log scale
  double kappa_true = 5.0;
  std::optional<ExpansionSpec> expansion;
  GenKind kind = GenKind::linear;
  bool two_arm = false;  // emit balanced arm labels independent of the outcome
  std::uint64_t seed = 0;

  std::int32_t design_dim() const {
    return expansion ? expansion->select_k : p_base;
  }
  void validate() const;
};

// Per-row generating truth, kept alongside the dataset for oracle checks.
struct SimTruth {
  std::vector<double> theta1, theta0, lambda;
  std::vector<std::uint8_t> d1, d2;
  std::vector<double> expected_y;  // theta1 + (1-theta1)(1-theta0) lambda/(1+lambda)

  double interior_mean(std::size_t i) const { return lambda[i] / (1.0 + lambda[i]); }
};

// All 2^base_dim - 1 nonempty column products in canonical order (by subset
// size, then lexicographically by index set); selects select_k of them
// uniformly without replacement and prepends an intercept column.
Matrix build_interaction_expansion(const Matrix& base, std::int32_t select_k, Rng& rng);

std::pair<Dataset, SimTruth> generate_dataset(const SimConfig& cfg);

// The nine-cell grid, the two desk-study configs (with linear and nonlinear
// variants), and the null presets.
std::vector<SimConfig> scenario_presets();
SimConfig preset_by_name(const std::string& name);

}  // namespace hobz

#endif
