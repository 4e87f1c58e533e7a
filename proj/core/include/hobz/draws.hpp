#ifndef HOBZ_DRAWS_HPP
#define HOBZ_DRAWS_HPP

#include <cstdint>
#include <vector>

#include "hobz/errors.hpp"

namespace hobz {

struct Schedule {
  std::int32_t iterations = 5000;
  std::int32_t burn_in = 2500;
  std::int32_t thin = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (iterations < 0 || burn_in < 0 || burn_in > iterations)
      throw ValidationError("schedule: need 0 <= burn_in <= iterations");
    if (thin < 1) throw ValidationError("schedule: thin must be >= 1");
  }

  // Iterations i in [burn_in, iterations) with (i - burn_in) % thin == 0.
  std::int32_t num_kept() const {
    if (iterations == burn_in) return 0;
    return (iterations - burn_in + thin - 1) / thin;
  }
};

// Per-draw latent components for train and (optionally) test rows, draw-major.
struct PosteriorDraws {
  std::uint32_t n_train = 0;
  std::uint32_t n_test = 0;
  std::uint32_t num_draws = 0;
  std::uint32_t iterations = 0, burn_in = 0, thin = 0, num_trees = 0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  std::vector<double> kappa;  // num_draws
  std::vector<double> f1_train, f0_train, fb_train;  // num_draws * n_train
  std::vector<double> f1_test, f0_test, fb_test;     // num_draws * n_test

  double f1t(std::size_t l, std::size_t i) const { return f1_train[l * n_train + i]; }
  double f0t(std::size_t l, std::size_t i) const { return f0_train[l * n_train + i]; }
  double fbt(std::size_t l, std::size_t i) const { return fb_train[l * n_train + i]; }
  double f1s(std::size_t l, std::size_t i) const { return f1_test[l * n_test + i]; }
  double f0s(std::size_t l, std::size_t i) const { return f0_test[l * n_test + i]; }
  double fbs(std::size_t l, std::size_t i) const { return fb_test[l * n_test + i]; }

  bool has_test() const { return n_test > 0; }
};

}  // namespace hobz

#endif
