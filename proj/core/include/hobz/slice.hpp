#ifndef HOBZ_SLICE_HPP
#define HOBZ_SLICE_HPP

#include <utility>

#include "hobz/rng.hpp"

namespace hobz {

// Univariate slice sampler with step-out and shrinkage (Neal 2003).
// `logpdf` may be unnormalized. Step-out is capped at max_steps doublings
// per side; the shrink loop always terminates at x0.
template <typename F>
double slice_sample(double x0, F&& logpdf, double width, int max_steps, Rng& rng) {
  const double gx0 = logpdf(x0);
  const double logy = gx0 - rng.exponential();

  const double u = width * rng.uniform();
  double lo = x0 - u;
  double hi = x0 + (width - u);
  for (int s = 0; s < max_steps && logpdf(lo) > logy; ++s) lo -= width;
  for (int s = 0; s < max_steps && logpdf(hi) > logy; ++s) hi += width;

  for (;;) {
    const double x1 = lo + (hi - lo) * rng.uniform();
    if (logpdf(x1) >= logy) return x1;
    if (hi - lo < 1e-14) return x0;
    if (x1 > x0) {
      hi = x1;
    } else {
      lo = x1;
    }
  }
}

}  // namespace hobz

#endif
