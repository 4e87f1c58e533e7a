#ifndef HOBZ_DATASET_HPP
#define HOBZ_DATASET_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hobz {

// Dense row-major matrix, used for covariates and design matrices.
struct Matrix {
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;
  std::vector<double> data;  // n_rows * n_cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : n_rows(r), n_cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * n_cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * n_cols + j]; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * n_cols, n_cols};
  }
};

// Training data for the hurdle model: covariates, response in [0,1], and the
// boundary masks derived by exact comparison with 0.0 and 1.0.
struct Dataset {
  Matrix x;
  std::vector<double> y;
  std::vector<std::uint8_t> is_one;       // y == 1
  std::vector<std::uint8_t> is_zero;      // y == 0 (implies y < 1)
  std::vector<std::uint8_t> is_interior;  // 0 < y < 1
  std::vector<double> log_y;              // valid on interior rows, else 0
  std::vector<double> log_1my;            // valid on interior rows, else 0
  std::vector<std::string> column_names;  // covariate names (may be empty)

  // Optional two-arm labels: arm[i] in {0, 1}; empty when absent.
  std::vector<std::int8_t> arm;
  std::string arm_name_0, arm_name_1;

  std::size_t n_rows() const { return y.size(); }
  std::size_t n_cols() const { return x.n_cols; }

  std::size_t n_ones = 0, n_zeros = 0, n_interior = 0;

  // Validates y-range/finiteness, builds masks and cached logs. Throws
  // ValidationError naming the offending row on bad input.
  static Dataset from_xy(Matrix x, std::vector<double> y);

  // Rows with arm == which, covariates and response only.
  Dataset subset_by_arm(int which) const;
  // Rows listed in `rows`.
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

}  // namespace hobz

#endif
