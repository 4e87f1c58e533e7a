#include "hobz/dataset.hpp"

#include <cmath>

#include "hobz/errors.hpp"

namespace hobz {

Dataset Dataset::from_xy(Matrix x, std::vector<double> y) {
  if (x.n_rows != y.size())
    throw ValidationError("dataset: covariate rows (" + std::to_string(x.n_rows) +
                          ") != response length (" + std::to_string(y.size()) + ")");
  Dataset d;
  const std::size_t n = y.size();
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    if (!std::isfinite(x.data[i]))
      throw ValidationError("dataset: non-finite covariate at row " +
                            std::to_string(i / x.n_cols) + ", column " +
                            std::to_string(i % x.n_cols));
  }
  d.is_one.assign(n, 0);
  d.is_zero.assign(n, 0);
  d.is_interior.assign(n, 0);
  d.log_y.assign(n, 0.0);
  d.log_1my.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = y[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw ValidationError("dataset: response out of [0,1] at row " + std::to_string(i) +
                            " (value " + std::to_string(v) + ")");
    if (v == 1.0) {
      d.is_one[i] = 1;
      ++d.n_ones;
    } else if (v == 0.0) {
      d.is_zero[i] = 1;
      ++d.n_zeros;
    } else {
      d.is_interior[i] = 1;
      ++d.n_interior;
      d.log_y[i] = std::log(v);
      d.log_1my[i] = std::log1p(-v);
    }
  }
  d.x = std::move(x);
  d.y = std::move(y);
  return d;
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Matrix xs(rows.size(), x.n_cols);
  std::vector<double> ys(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    for (std::size_t j = 0; j < x.n_cols; ++j) xs.at(k, j) = x.at(i, j);
    ys[k] = y[i];
  }
  Dataset out = from_xy(std::move(xs), std::move(ys));
  out.column_names = column_names;
  if (!arm.empty()) {
    out.arm.resize(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) out.arm[k] = arm[rows[k]];
    out.arm_name_0 = arm_name_0;
    out.arm_name_1 = arm_name_1;
  }
  return out;
}

Dataset Dataset::subset_by_arm(int which) const {
  if (arm.empty()) throw ValidationError("dataset: no arm labels present");
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < n_rows(); ++i)
    if (arm[i] == which) rows.push_back(i);
  Dataset out = subset(rows);
  out.arm.clear();
  return out;
}

}  // namespace hobz
