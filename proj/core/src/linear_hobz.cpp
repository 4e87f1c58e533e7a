#include "hobz/linear_hobz.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "hobz/errors.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/rng.hpp"
#include "hobz/slice.hpp"

namespace hobz {

namespace {

Eigen::MatrixXd with_intercept(const Matrix& x) {
  Eigen::MatrixXd d(x.n_rows, x.n_cols + 1);
  for (std::size_t i = 0; i < x.n_rows; ++i) {
    d(i, 0) = 1.0;
    for (std::size_t j = 0; j < x.n_cols; ++j) d(i, j + 1) = x.at(i, j);
  }
  return d;
}

// Posterior factor for a unit-variance Gaussian regression with a N(0, t^2 I)
// prior: beta | phi ~ N(M^-1 D' phi, M^-1), M = D'D + I/t^2.
struct ConjugateBlock {
  Eigen::MatrixXd dt;       // D'
  Eigen::LLT<Eigen::MatrixXd> llt;

  ConjugateBlock() = default;
  ConjugateBlock(const Eigen::MatrixXd& d, double prior_sd) {
    dt = d.transpose();
    Eigen::MatrixXd m = dt * d;
    m.diagonal().array() += 1.0 / (prior_sd * prior_sd);
    llt.compute(m);
    if (llt.info() != Eigen::Success)
      throw NumericError("linear hobz: conjugate block factorization failed");
  }

  Eigen::VectorXd draw(const Eigen::VectorXd& phi, Rng& rng) const {
    const Eigen::VectorXd mean = llt.solve(dt * phi);
    Eigen::VectorXd z(mean.size());
    for (int i = 0; i < z.size(); ++i) z(i) = rng.normal();
    // chol(M^-1) = L^-T for M = L L'.
    return mean + llt.matrixU().solve(z);
  }
};

}  // namespace

PosteriorDraws fit_linear_hobz(const Dataset& data, const Matrix* test_x,
                               const Schedule& schedule, double prior_sd,
                               LinearHobzDiagnostics* diag) {
  schedule.validate();
  if (!(prior_sd > 0.0)) throw ValidationError("linear hobz: prior_sd must be positive");
  const std::size_t n = data.n_rows();
  if (n == 0) throw ValidationError("linear hobz: empty dataset");
  if (test_x && test_x->n_rows > 0 && test_x->n_cols != data.n_cols())
    throw ValidationError("linear hobz: test matrix column mismatch");

  const Eigen::MatrixXd d_all = with_intercept(data.x);
  const int p1 = static_cast<int>(d_all.cols());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d_all);
  if (qr.rank() < p1)
    throw ValidationError("linear hobz: design is rank deficient after intercept "
                          "augmentation (rank " + std::to_string(qr.rank()) + " of " +
                          std::to_string(p1) + ")");

  // Row sets below the first hurdle and strictly interior.
  std::vector<std::size_t> lt1_rows, int_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (!data.is_one[i]) lt1_rows.push_back(i);
    if (data.is_interior[i]) int_rows.push_back(i);
  }

  Eigen::MatrixXd d_lt1(lt1_rows.size(), p1);
  for (std::size_t k = 0; k < lt1_rows.size(); ++k) d_lt1.row(k) = d_all.row(lt1_rows[k]);
  Eigen::MatrixXd d_int(int_rows.size(), p1);
  for (std::size_t k = 0; k < int_rows.size(); ++k) d_int.row(k) = d_all.row(int_rows[k]);

  const ConjugateBlock block1(d_all, prior_sd);
  ConjugateBlock block0;
  if (!lt1_rows.empty()) block0 = ConjugateBlock(d_lt1, prior_sd);

  Eigen::MatrixXd d_test;
  const std::size_t m = test_x ? test_x->n_rows : 0;
  if (m > 0) d_test = with_intercept(*test_x);

  Rng rng(schedule.seed);
  Eigen::VectorXd beta_a = Eigen::VectorXd::Zero(p1);
  Eigen::VectorXd beta_g = Eigen::VectorXd::Zero(p1);
  Eigen::VectorXd beta_m = Eigen::VectorXd::Zero(p1);
  double kappa = rng.gamma(1.0, 2.0);

  // Approximate interior log likelihood plus prior, as a function of beta_mu.
  std::vector<double> int_logy(int_rows.size()), int_log1my(int_rows.size());
  for (std::size_t k = 0; k < int_rows.size(); ++k) {
    int_logy[k] = data.log_y[int_rows[k]];
    int_log1my[k] = data.log_1my[int_rows[k]];
  }
  auto mu_log_target = [&](const Eigen::VectorXd& b) {
    double s = -0.5 * b.squaredNorm() / (prior_sd * prior_sd);
    if (int_rows.empty()) return s;
    const Eigen::VectorXd lin = d_int * b;
    const double lgk = std::lgamma(kappa);
    for (std::size_t k = 0; k < int_rows.size(); ++k) {
      const double lam = std::exp(lin(k));
      s += kappa * (std::log(kappa) + lin(k)) + kappa * lam * int_logy[k] +
           (kappa - 1.0) * int_log1my[k] - lgk;
    }
    return s;
  };

  double rw_log_scale = std::log(2.4 / std::sqrt(static_cast<double>(p1)));
  double mu_cur_target = mu_log_target(beta_m);
  std::uint64_t mu_acc = 0, mu_tot = 0;

  PosteriorDraws out;
  out.n_train = static_cast<std::uint32_t>(n);
  out.n_test = static_cast<std::uint32_t>(m);
  out.num_draws = static_cast<std::uint32_t>(schedule.num_kept());
  out.iterations = schedule.iterations;
  out.burn_in = schedule.burn_in;
  out.thin = schedule.thin;
  out.num_trees = 0;
  out.seed = schedule.seed;

  Eigen::VectorXd phi1(n), phi0(lt1_rows.size());
  std::vector<Eigen::VectorXd> kept_a, kept_g, kept_m;

  for (std::int32_t it = 0; it < schedule.iterations; ++it) {
    // Probit blocks via truncated-normal augmentation.
    const Eigen::VectorXd f1 = d_all * beta_a;
    for (std::size_t i = 0; i < n; ++i) {
      phi1(i) = data.is_one[i] ? rng.truncated_normal_above(f1(i), 0.0)
                               : rng.truncated_normal_below(f1(i), 0.0);
    }
    beta_a = block1.draw(phi1, rng);

    if (!lt1_rows.empty()) {
      const Eigen::VectorXd f0 = d_lt1 * beta_g;
      for (std::size_t k = 0; k < lt1_rows.size(); ++k) {
        phi0(k) = data.is_zero[lt1_rows[k]] ? rng.truncated_normal_above(f0(k), 0.0)
                                            : rng.truncated_normal_below(f0(k), 0.0);
      }
      beta_g = block0.draw(phi0, rng);
    }

    // Interior coefficients: joint random-walk step, scale adapted during
    // burn-in only.
    {
      Eigen::VectorXd prop = beta_m;
      const double s = std::exp(rw_log_scale);
      for (int j = 0; j < p1; ++j) prop(j) += s * rng.normal();
      const double prop_target = mu_log_target(prop);
      ++mu_tot;
      const bool accept = std::log(rng.uniform_pos()) < prop_target - mu_cur_target;
      if (accept) {
        beta_m = prop;
        mu_cur_target = prop_target;
        ++mu_acc;
      }
      if (it < schedule.burn_in) {
        const double step = 1.0 / std::sqrt(1.0 + static_cast<double>(it) / 10.0);
        rw_log_scale += step * ((accept ? 1.0 : 0.0) - 0.234) * 0.5;
      }
    }

    // kappa from the exact Beta full conditional.
    if (!int_rows.empty()) {
      const Eigen::VectorXd lin = d_int * beta_m;
      std::vector<double> lam(int_rows.size());
      double c1 = 0.0;
      for (std::size_t k = 0; k < int_rows.size(); ++k) {
        lam[k] = std::exp(lin(k));
        c1 += lam[k] * int_logy[k] + int_log1my[k];
      }
      const double n_int = static_cast<double>(int_rows.size());
      auto logpdf = [&](double u) {
        if (u > 40.0 || u < -40.0) return -std::numeric_limits<double>::infinity();
        const double k = std::exp(u);
        double s = 0.0;
        for (double l : lam) s += std::lgamma(k * (l + 1.0)) - std::lgamma(k * l);
        s += -n_int * std::lgamma(k) + k * c1 + 1.0 * u - 2.0 * k;
        return s;
      };
      kappa = std::exp(slice_sample(std::log(kappa), logpdf, 1.0, 50, rng));
      mu_cur_target = mu_log_target(beta_m);  // target depends on kappa
    } else {
      kappa = rng.gamma(1.0, 2.0);
    }

    if (it < schedule.burn_in || (it - schedule.burn_in) % schedule.thin != 0) continue;

    out.kappa.push_back(kappa);
    const Eigen::VectorXd r1 = d_all * beta_a;
    const Eigen::VectorXd r0 = d_all * beta_g;
    const Eigen::VectorXd rm = d_all * beta_m;
    for (std::size_t i = 0; i < n; ++i) {
      out.f1_train.push_back(r1(i));
      out.f0_train.push_back(r0(i));
      out.fb_train.push_back(std::exp(rm(i)));
    }
    if (m > 0) {
      const Eigen::VectorXd s1 = d_test * beta_a;
      const Eigen::VectorXd s0 = d_test * beta_g;
      const Eigen::VectorXd sm = d_test * beta_m;
      for (std::size_t j = 0; j < m; ++j) {
        out.f1_test.push_back(s1(j));
        out.f0_test.push_back(s0(j));
        out.fb_test.push_back(std::exp(sm(j)));
      }
    }
    if (diag) {
      kept_a.push_back(beta_a);
      kept_g.push_back(beta_g);
      kept_m.push_back(beta_m);
    }
  }

  if (diag) {
    diag->mu_accept_rate =
        mu_tot > 0 ? static_cast<double>(mu_acc) / static_cast<double>(mu_tot) : 0.0;
    auto summarize = [&](const std::vector<Eigen::VectorXd>& kept,
                         std::vector<double>& mean_out, std::vector<double>& sd_out) {
      mean_out.assign(p1, 0.0);
      sd_out.assign(p1, 0.0);
      if (kept.empty()) return;
      for (const auto& v : kept)
        for (int j = 0; j < p1; ++j) mean_out[j] += v(j);
      for (int j = 0; j < p1; ++j) mean_out[j] /= static_cast<double>(kept.size());
      for (const auto& v : kept)
        for (int j = 0; j < p1; ++j)
          sd_out[j] += (v(j) - mean_out[j]) * (v(j) - mean_out[j]);
      for (int j = 0; j < p1; ++j)
        sd_out[j] = kept.size() > 1
                        ? std::sqrt(sd_out[j] / static_cast<double>(kept.size() - 1))
                        : 0.0;
    };
    summarize(kept_a, diag->beta_alpha_mean, diag->beta_alpha_sd);
    summarize(kept_g, diag->beta_gamma_mean, diag->beta_gamma_sd);
    summarize(kept_m, diag->beta_mu_mean, diag->beta_mu_sd);
  }
  return out;
}

}  // namespace hobz
