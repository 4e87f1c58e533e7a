#ifndef HOBZ_RNG_HPP
#define HOBZ_RNG_HPP

#include <cstdint>
#include <random>

namespace hobz {

// Deterministic random stream. All draws are hand-rolled on top of the raw
// mt19937_64 output so that sequences do not depend on the standard library's
// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  // Independent stream derived from (seed, index); used for parallel work.
  Rng substream(std::uint64_t index) const;

  double uniform();      // [0, 1)
  double uniform_pos();  // (0, 1)
  std::uint64_t uniform_int(std::uint64_t n);  // {0, ..., n-1}, unbiased

  double normal();       // N(0, 1)
  double exponential();  // rate 1

  double gamma(double shape, double rate);
  double beta(double a, double b);

  // X ~ N(mean, 1) conditioned on X > lower (exact; Robert's exponential
  // rejection in the far tail).
  double truncated_normal_above(double mean, double lower);
  // X ~ N(mean, 1) conditioned on X < upper.
  double truncated_normal_below(double mean, double upper);

 private:
  double standard_gamma(double shape);  // scale 1

  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace hobz

#endif
