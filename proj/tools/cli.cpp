#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hobz/errors.hpp"
#include "hobz/inference.hpp"
#include "hobz/io.hpp"
#include "hobz/linear_hobz.hpp"
#include "hobz/mathutil.hpp"
#include "hobz/parallel.hpp"
#include "hobz/sampler.hpp"
#include "hobz/simgen.hpp"
#include "hobz/version.hpp"

namespace hobz::cli {

namespace {

using json = nlohmann::ordered_json;

// Fingerprint of the statistical configuration. File paths stay out so that
// the same run into a different location reproduces identical artifacts.
class ConfigHash {
 public:
  ConfigHash& add(const std::string& k, const std::string& v) {
    canon_ += k;
    canon_ += '=';
    canon_ += v;
    canon_ += ';';
    return *this;
  }
  ConfigHash& add(const std::string& k, double v) { return add(k, format_double(v)); }
  ConfigHash& add(const std::string& k, std::int64_t v) {
    return add(k, std::to_string(v));
  }
  ConfigHash& add(const std::string& k, std::uint64_t v) {
    return add(k, std::to_string(v));
  }
  std::uint64_t get() const { return fnv1a(canon_); }

 private:
  std::string canon_;
};

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

void stamp(json& j, std::uint64_t seed, std::uint64_t config_hash) {
  j["version"] = kVersion;
  j["seed"] = seed;
  j["config_hash"] = config_hash;
}

struct ScheduleOpts {
  std::int64_t iterations = 5000;
  std::int64_t burn_in = 2500;
  std::int64_t thin = 1;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--iterations", iterations, "MCMC iterations");
    cmd->add_option("--burn-in", burn_in, "Burn-in iterations");
    cmd->add_option("--thin", thin, "Thinning stride");
    cmd->add_option("--seed", seed, "RNG seed");
  }
  Schedule make() const {
    Schedule s;
    s.iterations = static_cast<std::int32_t>(iterations);
    s.burn_in = static_cast<std::int32_t>(burn_in);
    s.thin = static_cast<std::int32_t>(thin);
    s.seed = seed;
    s.validate();
    return s;
  }
  void add_to(ConfigHash& h) const {
    h.add("iterations", iterations).add("burn_in", burn_in).add("thin", thin).add("seed",
                                                                                  seed);
  }
};

struct HyperOpts {
  std::int64_t trees = 200;  // application-scale default for the CLI
  double k = 2.0;
  double tree_alpha = 0.95, tree_beta = 2.0;
  double alpha_g = 0.5, beta_g = 0.15;
  double alpha_kappa = 1.0, beta_kappa = 2.0;
  std::int64_t min_leaf = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--trees", trees, "Number of trees in the ensemble");
    cmd->add_option("--k", k, "Probit leaf prior calibration factor");
    cmd->add_option("--tree-alpha", tree_alpha, "Tree prior alpha");
    cmd->add_option("--tree-beta", tree_beta, "Tree prior beta");
    cmd->add_option("--alpha-g", alpha_g, "Lambda leaf prior shape");
    cmd->add_option("--beta-g", beta_g, "Lambda leaf prior rate");
    cmd->add_option("--alpha-kappa", alpha_kappa, "Kappa prior shape");
    cmd->add_option("--beta-kappa", beta_kappa, "Kappa prior rate");
    cmd->add_option("--min-leaf", min_leaf, "Minimum training rows per leaf");
  }
  Hyperparams make() const {
    Hyperparams h = Hyperparams::defaults(static_cast<std::int32_t>(trees), k);
    h.tree_alpha = tree_alpha;
    h.tree_beta = tree_beta;
    h.alpha_g = alpha_g;
    h.beta_g = beta_g;
    h.alpha_kappa = alpha_kappa;
    h.beta_kappa = beta_kappa;
    h.min_leaf_size = static_cast<std::int32_t>(min_leaf);
    h.validate();
    return h;
  }
  void add_to(ConfigHash& h) const {
    h.add("trees", trees)
        .add("k", k)
        .add("tree_alpha", tree_alpha)
        .add("tree_beta", tree_beta)
        .add("alpha_g", alpha_g)
        .add("beta_g", beta_g)
        .add("alpha_kappa", alpha_kappa)
        .add("beta_kappa", beta_kappa)
        .add("min_leaf", min_leaf);
  }
};

std::vector<double> posterior_mean_expected(const PosteriorDraws& d, bool test) {
  return posterior_mean_expected_outcome(d, test);
}

std::vector<double> posterior_mean_partial(const PosteriorDraws& d, bool test) {
  return posterior_mean_partial_outcome(d, test);
}

std::vector<double> posterior_mean_interior(const PosteriorDraws& d, bool test) {
  return posterior_mean_interior_mean(d, test);
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const std::string& preset, std::uint64_t seed, const std::string& out,
                 double split, std::int64_t n_override, double kappa_override,
                 std::uint64_t config_hash) {
  SimConfig cfg = preset_by_name(preset);
  cfg.seed = seed;
  if (n_override > 0) cfg.n = static_cast<std::int32_t>(n_override);
  if (kappa_override > 0) cfg.kappa_true = kappa_override;
  auto [data, truth] = generate_dataset(cfg);

  json meta;
  stamp(meta, seed, config_hash);
  meta["preset"] = cfg.name;
  meta["n"] = cfg.n;
  meta["p_base"] = cfg.p_base;
  meta["kappa_true"] = cfg.kappa_true;
  meta["two_arm"] = cfg.two_arm;
  if (cfg.expansion) {
    meta["expansion_base_dim"] = cfg.expansion->base_dim;
    meta["expansion_select_k"] = cfg.expansion->select_k;
  }

  if (split > 0.0) {
    if (split >= 1.0) throw ValidationError("--split must lie in (0,1)");
    const std::size_t n_train =
        static_cast<std::size_t>(split * static_cast<double>(data.n_rows()));
    if (n_train == 0 || n_train == data.n_rows())
      throw ValidationError("--split leaves an empty partition");
    std::vector<std::size_t> tr(n_train), te(data.n_rows() - n_train);
    std::iota(tr.begin(), tr.end(), 0);
    std::iota(te.begin(), te.end(), n_train);
    write_dataset_csv(out + "_train.csv", data.subset(tr));
    write_dataset_csv(out + "_test.csv", data.subset(te));
    SimTruth t_tr, t_te;
    auto copy_rows = [&](SimTruth& dst, const std::vector<std::size_t>& rows) {
      for (std::size_t i : rows) {
        dst.theta1.push_back(truth.theta1[i]);
        dst.theta0.push_back(truth.theta0[i]);
        dst.lambda.push_back(truth.lambda[i]);
        dst.d1.push_back(truth.d1[i]);
        dst.d2.push_back(truth.d2[i]);
        dst.expected_y.push_back(truth.expected_y[i]);
      }
    };
    copy_rows(t_tr, tr);
    copy_rows(t_te, te);
    write_truth_csv(out + "_train_truth.csv", t_tr);
    write_truth_csv(out + "_test_truth.csv", t_te);
    meta["train_rows"] = n_train;
    meta["test_rows"] = data.n_rows() - n_train;
  } else {
    write_dataset_csv(out + ".csv", data);
    write_truth_csv(out + "_truth.csv", truth);
  }
  write_json(out + "_meta.json", meta);
  std::cout << "simulate: preset " << cfg.name << ", n=" << cfg.n << ", seed=" << seed
            << "\n";
  return 0;
}

// --------------------------------------------------------------------- fit

int cmd_fit(const std::string& data_path, const std::string& response,
            const std::string& arm_col, const std::string& train_arm,
            const std::string& test_path, const std::string& model,
            const ScheduleOpts& sopts, const HyperOpts& hopts, const std::string& out,
            const std::string& summary_path, std::uint64_t config_hash) {
  Dataset data = ingest_csv(data_path, response, arm_col);
  if (!train_arm.empty()) {
    if (arm_col.empty()) throw ValidationError("--train-arm requires --arm");
    int which = -1;
    if (train_arm == data.arm_name_0) which = 0;
    if (train_arm == data.arm_name_1) which = 1;
    if (which < 0)
      throw ValidationError("--train-arm '" + train_arm + "' not found (labels: " +
                            data.arm_name_0 + ", " + data.arm_name_1 + ")");
    data = data.subset_by_arm(which);
  }

  Matrix test;
  const bool has_test = !test_path.empty();
  if (has_test) test = ingest_csv_matrix(test_path, data.column_names);

  const Schedule schedule = sopts.make();
  PosteriorDraws draws;
  json summary;
  stamp(summary, schedule.seed, config_hash);
  summary["model"] = model;
  summary["n_train"] = data.n_rows();
  summary["n_test"] = has_test ? test.n_rows : 0;

  if (model == "hobz-bart") {
    const Hyperparams h = hopts.make();
    ChainDiagnostics diag;
    draws = run_chain(data, has_test ? &test : nullptr, h, schedule, &diag);
    summary["trees"] = h.num_trees;
    summary["mh_accept_rate"] = diag.accept_rate();
    summary["mean_leaves"] = diag.mean_leaves;
    summary["kappa_mean"] = diag.kappa_mean;
    summary["kappa_sd"] = diag.kappa_sd;
  } else if (model == "linear-hobz") {
    LinearHobzDiagnostics diag;
    draws = fit_linear_hobz(data, has_test ? &test : nullptr, schedule, 10.0, &diag);
    summary["mu_accept_rate"] = diag.mu_accept_rate;
  } else {
    throw ValidationError("--model must be hobz-bart or linear-hobz");
  }

  draws.config_hash = config_hash;
  write_draws(out, draws);
  summary["draws"] = draws.num_draws;
  if (!summary_path.empty()) write_json(summary_path, summary);
  std::cout << "fit: " << model << " on " << data.n_rows() << " rows, " << draws.num_draws
            << " draws -> " << out << "\n";
  return 0;
}

// ----------------------------------------------------------------- predict

int cmd_predict(const std::string& draws_path, const std::string& rows,
                const std::string& out_dir, std::int64_t samples, std::uint64_t seed,
                const std::string& observed_path, const std::string& response,
                const std::string& truth_path, std::uint64_t config_hash) {
  const PosteriorDraws draws = read_draws(draws_path);
  if (draws.num_draws == 0) throw ValidationError("predict: draw file holds no draws");
  bool test;
  if (rows == "auto") {
    test = draws.has_test();
  } else if (rows == "test") {
    if (!draws.has_test()) throw ValidationError("predict: draw file has no test rows");
    test = true;
  } else if (rows == "train") {
    test = false;
  } else {
    throw ValidationError("--rows must be auto|train|test");
  }
  std::filesystem::create_directories(out_dir);

  const std::vector<double> e_full = posterior_mean_expected(draws, test);
  const std::vector<double> e_part = posterior_mean_partial(draws, test);
  {
    std::ofstream tab(out_dir + "/predictions.csv");
    if (!tab) throw IoError("cannot open '" + out_dir + "/predictions.csv'");
    tab << "row,expected_outcome,expected_partial_outcome\n";
    for (std::size_t i = 0; i < e_full.size(); ++i)
      tab << i << ',' << format_double(e_full[i]) << ',' << format_double(e_part[i])
          << '\n';
  }

  if (samples > 0) {
    Rng rng(seed);
    std::ofstream raw(out_dir + "/prediction_samples.csv");
    if (!raw) throw IoError("cannot open '" + out_dir + "/prediction_samples.csv'");
    raw << "draw,row,category,value\n";
    const std::size_t n = e_full.size();
    for (std::int64_t s = 0; s < samples; ++s) {
      const std::size_t l = rng.uniform_int(draws.num_draws);
      for (std::size_t i = 0; i < n; ++i) {
        const double f1 = test ? draws.f1s(l, i) : draws.f1t(l, i);
        const double f0 = test ? draws.f0s(l, i) : draws.f0t(l, i);
        const double fb = test ? draws.fbs(l, i) : draws.fbt(l, i);
        const PredictionDraw p = sample_prediction(f1, f0, fb, draws.kappa[l], rng);
        const char* cat = p.category == PredCategory::one      ? "one"
                          : p.category == PredCategory::zero   ? "zero"
                                                               : "interior";
        raw << l << ',' << i << ',' << cat << ',' << format_double(p.value) << '\n';
      }
    }
  }

  json metrics;
  stamp(metrics, draws.seed, config_hash);
  metrics["rows"] = test ? "test" : "train";
  bool have_metrics = false;
  if (!observed_path.empty()) {
    const Dataset obs = ingest_csv(observed_path, response);
    if (obs.n_rows() != e_full.size())
      throw ValidationError("predict: observed rows (" + std::to_string(obs.n_rows()) +
                            ") do not match prediction rows (" +
                            std::to_string(e_full.size()) + ")");
    const MetricsReport m = compute_metrics(e_full, obs.y);
    metrics["mae"] = m.mae;
    metrics["mse"] = m.mse;
    metrics["rmse"] = m.rmse;
    metrics["adj_r2"] = m.adj_r2;
    metrics["adj_r2_degenerate"] = m.degenerate;
    have_metrics = true;
  }
  if (!truth_path.empty()) {
    std::ifstream in(truth_path);
    if (!in) throw IoError("cannot open '" + truth_path + "'");
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> true_e, true_mu;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string cell;
      std::vector<double> cells;
      while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
      if (cells.size() < 6) throw ValidationError("truth file: expected 6 columns");
      true_mu.push_back(cells[2] / (1.0 + cells[2]));
      true_e.push_back(cells[5]);
    }
    if (true_e.size() != e_full.size())
      throw ValidationError("predict: truth rows do not match prediction rows");
    double mae_t = 0.0, mae_i = 0.0;
    const std::vector<double> mu_hat = posterior_mean_interior(draws, test);
    for (std::size_t i = 0; i < e_full.size(); ++i) {
      mae_t += std::abs(e_full[i] - true_e[i]);
      mae_i += std::abs(mu_hat[i] - true_mu[i]);
    }
    metrics["mae_true"] = mae_t / static_cast<double>(e_full.size());
    metrics["mae_interior_true"] = mae_i / static_cast<double>(e_full.size());
    have_metrics = true;
  }
  if (have_metrics) write_json(out_dir + "/metrics.json", metrics);
  std::cout << "predict: " << e_full.size() << " rows -> " << out_dir << "\n";
  return 0;
}

// -------------------------------------------------------------------- pite

int cmd_pite(const std::string& draws_t_path, const std::string& draws_c_path,
             const std::string& metric_s, double level, const std::string& out_dir,
             std::uint64_t config_hash) {
  const PosteriorDraws dt = read_draws(draws_t_path);
  const PosteriorDraws dc = read_draws(draws_c_path);
  const PiteMetric metric = pite_metric_from_string(metric_s);
  const PiteResult res = compute_pite(dt, dc, metric, level);
  std::filesystem::create_directories(out_dir);

  {
    std::ofstream tab(out_dir + "/pite.csv");
    if (!tab) throw IoError("cannot open '" + out_dir + "/pite.csv'");
    tab << "id,point,lower,upper,metric\n";
    for (std::size_t i = 0; i < res.point.size(); ++i)
      tab << i << ',' << format_double(res.point[i]) << ',' << format_double(res.lower[i])
          << ',' << format_double(res.upper[i]) << ',' << to_string(metric) << '\n';
  }
  {
    // Rank-ordered plot data: individuals sorted by point estimate.
    std::vector<std::size_t> order(res.point.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return res.point[a] < res.point[b]; });
    std::ofstream tab(out_dir + "/pite_sorted.csv");
    if (!tab) throw IoError("cannot open '" + out_dir + "/pite_sorted.csv'");
    tab << "rank,id,point,lower,upper\n";
    for (std::size_t r = 0; r < order.size(); ++r) {
      const std::size_t i = order[r];
      tab << r << ',' << i << ',' << format_double(res.point[i]) << ','
          << format_double(res.lower[i]) << ',' << format_double(res.upper[i]) << '\n';
    }
  }
  json summary;
  stamp(summary, dt.seed, config_hash);
  summary["metric"] = to_string(metric);
  summary["level"] = level;
  summary["n"] = res.point.size();
  summary["ate"] = res.ate;
  summary["pite_sd"] = sample_sd(res.point);
  write_json(out_dir + "/pite_summary.json", summary);
  std::cout << "ate: " << format_double(res.ate) << "\n";
  return 0;
}

// ---------------------------------------------------------------- permtest

int cmd_permtest(const std::string& data_path, const std::string& response,
                 const std::string& arm_col, std::int64_t n_perm,
                 const std::string& metric_s, const ScheduleOpts& sopts,
                 const HyperOpts& hopts, unsigned threads, const std::string& out,
                 std::uint64_t config_hash) {
  if (arm_col.empty()) throw ValidationError("permtest: --arm is required");
  const Dataset data = ingest_csv(data_path, response, arm_col);
  const Schedule schedule = sopts.make();
  const Hyperparams h = hopts.make();
  const PiteMetric metric = pite_metric_from_string(metric_s);
  const PermTestResult res =
      permutation_test(data, h, schedule, metric, static_cast<std::int32_t>(n_perm), threads);

  json j;
  stamp(j, schedule.seed, config_hash);
  j["metric"] = to_string(metric);
  j["n_perm"] = n_perm;
  j["observed_pite_sd"] = res.observed_pite_sd;
  j["p_value"] = res.p_value;
  j["p_raw"] = res.p_raw;
  j["permuted_pite_sds"] = res.permuted_pite_sds;
  write_json(out, j);
  std::cout << "permtest: observed sd " << format_double(res.observed_pite_sd) << ", p = "
            << format_double(res.p_value) << " (" << n_perm << " permutations)\n";
  return 0;
}

// --------------------------------------------------------------- benchmark

int cmd_benchmark(const std::string& scenario, std::int64_t replications,
                  const std::string& models_s, double split, const ScheduleOpts& sopts,
                  const HyperOpts& hopts, unsigned threads, const std::string& out,
                  std::uint64_t config_hash) {
  std::vector<std::string> models;
  {
    std::stringstream ss(models_s);
    std::string m;
    while (std::getline(ss, m, ',')) models.push_back(m);
  }
  for (const std::string& m : models)
    if (m != "hobz-bart" && m != "linear-hobz")
      throw ValidationError("benchmark: unknown model '" + m + "'");
  if (replications < 1) throw ValidationError("benchmark: --replications must be >= 1");
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("benchmark: --split in (0,1)");

  const SimConfig base_cfg = preset_by_name(scenario);
  const Schedule schedule = sopts.make();
  const Hyperparams h = hopts.make();
  const Rng root(schedule.seed);

  struct Row {
    std::string model;
    std::int64_t rep;
    MetricsReport m;
    double mae_true, mae_interior_true;
  };
  std::vector<std::vector<Row>> rows(replications);

  parallel_for(static_cast<std::size_t>(replications), threads, [&](std::size_t rep) {
    SimConfig cfg = base_cfg;
    cfg.seed = root.substream(rep).seed();
    auto [data, truth] = generate_dataset(cfg);
    const std::size_t n_train =
        static_cast<std::size_t>(split * static_cast<double>(data.n_rows()));
    std::vector<std::size_t> tr(n_train), te(data.n_rows() - n_train);
    std::iota(tr.begin(), tr.end(), 0);
    std::iota(te.begin(), te.end(), n_train);
    const Dataset train = data.subset(tr);
    const Dataset test = data.subset(te);
    std::vector<double> y_test(te.size()), e_true(te.size()), mu_true(te.size());
    for (std::size_t k = 0; k < te.size(); ++k) {
      y_test[k] = data.y[te[k]];
      e_true[k] = truth.expected_y[te[k]];
      mu_true[k] = truth.interior_mean(te[k]);
    }

    for (const std::string& model : models) {
      Schedule sch = schedule;
      sch.seed = root.substream(rep).substream(model == "hobz-bart" ? 1 : 2).seed();
      PosteriorDraws draws;
      if (model == "hobz-bart") {
        draws = run_chain(train, &test.x, h, sch);
      } else {
        draws = fit_linear_hobz(train, &test.x, sch);
      }
      const std::vector<double> pred = posterior_mean_expected(draws, true);
      const std::vector<double> mu_hat = posterior_mean_interior(draws, true);
      Row row;
      row.model = model;
      row.rep = static_cast<std::int64_t>(rep);
      row.m = compute_metrics(pred, y_test);
      double mt = 0.0, mi = 0.0;
      for (std::size_t k = 0; k < pred.size(); ++k) {
        mt += std::abs(pred[k] - e_true[k]);
        mi += std::abs(mu_hat[k] - mu_true[k]);
      }
      row.mae_true = mt / static_cast<double>(pred.size());
      row.mae_interior_true = mi / static_cast<double>(pred.size());
      rows[rep].push_back(std::move(row));
    }
  });

  std::ofstream tab(out);
  if (!tab) throw IoError("cannot open '" + out + "' for writing");
  tab << "model,scenario,n,p,replication,mae,rmse,adj_r2,mae_true,mae_interior_true\n";
  const std::int32_t p_label = base_cfg.design_dim();
  for (const auto& rep_rows : rows) {
    for (const Row& r : rep_rows) {
      tab << r.model << ',' << scenario << ',' << base_cfg.n << ',' << p_label << ','
          << r.rep << ',' << format_double(r.m.mae) << ',' << format_double(r.m.rmse)
          << ',' << format_double(r.m.adj_r2) << ',' << format_double(r.mae_true) << ','
          << format_double(r.mae_interior_true) << '\n';
    }
  }
  if (!tab) throw IoError("write failed for '" + out + "'");

  // Console summary: per-model means.
  for (const std::string& model : models) {
    double mae = 0, rmse = 0, r2 = 0, mt = 0, mi = 0;
    std::size_t c = 0;
    for (const auto& rep_rows : rows)
      for (const Row& r : rep_rows)
        if (r.model == model) {
          mae += r.m.mae;
          rmse += r.m.rmse;
          r2 += r.m.adj_r2;
          mt += r.mae_true;
          mi += r.mae_interior_true;
          ++c;
        }
    const double dc = static_cast<double>(c);
    std::cout << model << ": mae=" << mae / dc << " rmse=" << rmse / dc
              << " adj_r2=" << r2 / dc << " mae_true=" << mt / dc
              << " mae_interior_true=" << mi / dc << " (" << c << " reps)\n";
  }
  (void)config_hash;
  return 0;
}

}  // namespace

int run(std::vector<std::string> args) {
  CLI::App app{"HOBZ-BART: sequential-hurdle Bayesian tree ensembles for outcomes on "
               "[0,1] with point masses at 0 and 1"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate a dataset from a scenario preset");
  std::string sim_preset = "null";
  std::uint64_t sim_seed = 0;
  std::string sim_out = "sim";
  double sim_split = 0.0;
  std::int64_t sim_n = 0;
  double sim_kappa = 0.0;
  sim->add_option("--preset", sim_preset, "Scenario preset name")->required();
  sim->add_option("--seed", sim_seed, "RNG seed");
  sim->add_option("--out", sim_out, "Output path prefix")->required();
  sim->add_option("--split", sim_split, "Train fraction; emits _train/_test files");
  sim->add_option("--n", sim_n, "Override the preset sample size");
  sim->add_option("--kappa", sim_kappa, "Override the preset kappa");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit the model and persist posterior draws");
  std::string fit_data, fit_response = "y", fit_arm, fit_train_arm, fit_test,
              fit_model = "hobz-bart", fit_out = "draws.hobz", fit_summary;
  ScheduleOpts fit_sched;
  HyperOpts fit_hyper;
  fit->add_option("--data", fit_data, "Training CSV")->required();
  fit->add_option("--response", fit_response, "Response column name");
  fit->add_option("--arm", fit_arm, "Arm column name");
  fit->add_option("--train-arm", fit_train_arm, "Train only on rows with this arm label");
  fit->add_option("--test", fit_test, "CSV with covariates to predict");
  fit->add_option("--model", fit_model, "hobz-bart | linear-hobz");
  fit->add_option("--out", fit_out, "Output draw file")->required();
  fit->add_option("--summary", fit_summary, "Convergence summary JSON path");
  fit_sched.attach(fit);
  fit_hyper.attach(fit);

  // predict
  auto* pred = app.add_subcommand("predict", "Expected outcomes from a draw file");
  std::string pred_draws, pred_rows = "auto", pred_out = "predict_out", pred_observed,
              pred_response = "y", pred_truth;
  std::int64_t pred_samples = 0;
  std::uint64_t pred_seed = 0;
  pred->add_option("--draws", pred_draws, "Draw file from fit")->required();
  pred->add_option("--rows", pred_rows, "auto | train | test");
  pred->add_option("--out", pred_out, "Output directory")->required();
  pred->add_option("--samples", pred_samples, "Raw tri-part sample passes to emit");
  pred->add_option("--seed", pred_seed, "Seed for raw samples");
  pred->add_option("--observed", pred_observed, "CSV with observed responses for metrics");
  pred->add_option("--response", pred_response, "Response column in --observed");
  pred->add_option("--truth", pred_truth, "Simulation truth sidecar for truth metrics");

  // pite
  auto* pite = app.add_subcommand("pite", "Predicted individual treatment effects");
  std::string pite_t, pite_c, pite_metric = "full", pite_out = "pite_out";
  double pite_level = 0.6;
  pite->add_option("--draws-t", pite_t, "Draw file for the treatment arm")->required();
  pite->add_option("--draws-c", pite_c, "Draw file for the control arm")->required();
  pite->add_option("--metric", pite_metric, "full | partial");
  pite->add_option("--level", pite_level, "Credible level (default 0.6)");
  pite->add_option("--out", pite_out, "Output directory")->required();

  // permtest
  auto* perm = app.add_subcommand("permtest", "Permutation test for PITE heterogeneity");
  std::string perm_data, perm_response = "y", perm_arm, perm_metric = "full",
              perm_out = "permtest.json";
  std::int64_t perm_n = 500;
  unsigned perm_threads = 0;
  ScheduleOpts perm_sched;
  HyperOpts perm_hyper;
  perm_hyper.trees = 50;
  perm->add_option("--data", perm_data, "Two-arm CSV")->required();
  perm->add_option("--response", perm_response, "Response column name");
  perm->add_option("--arm", perm_arm, "Arm column name")->required();
  perm->add_option("--n-perm", perm_n, "Number of permutations");
  perm->add_option("--metric", perm_metric, "full | partial");
  perm->add_option("--threads", perm_threads, "Worker threads (0 = hardware)");
  perm->add_option("--out", perm_out, "Output JSON path");
  perm_sched.attach(perm);
  perm_hyper.attach(perm);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Model comparison on scenario presets");
  std::string bench_scenario, bench_models = "hobz-bart,linear-hobz",
              bench_out = "benchmark.csv";
  std::int64_t bench_reps = 10;
  double bench_split = 0.5;
  unsigned bench_threads = 0;
  ScheduleOpts bench_sched;
  HyperOpts bench_hyper;
  bench_hyper.trees = 100;  // simulation-study scale
  bench->add_option("--scenario", bench_scenario, "Scenario preset name")->required();
  bench->add_option("--models", bench_models, "Comma-separated model list");
  bench->add_option("--replications", bench_reps, "Monte Carlo replications");
  bench->add_option("--split", bench_split, "Train fraction");
  bench->add_option("--threads", bench_threads, "Worker threads (0 = hardware)");
  bench->add_option("--out", bench_out, "Output CSV path");
  bench_sched.attach(bench);
  bench_hyper.attach(bench);

  std::vector<const char*> argv;
  argv.push_back("hobz");
  for (const std::string& a : args) argv.push_back(a.c_str());

  try {
    try {
      app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {  // --help
        CLI::App* help_app = &app;
        std::cout << help_app->help();
        return 0;
      }
      throw ValidationError(std::string("argument error: ") + e.what());
    }

    if (sim->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("simulate"))
          .add("preset", sim_preset)
          .add("seed", sim_seed)
          .add("split", sim_split)
          .add("n", sim_n)
          .add("kappa", sim_kappa);
      return cmd_simulate(sim_preset, sim_seed, sim_out, sim_split, sim_n, sim_kappa,
                          h.get());
    }
    if (fit->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("fit"))
          .add("model", fit_model)
          .add("response", fit_response)
          .add("arm", fit_arm)
          .add("train_arm", fit_train_arm);
      fit_sched.add_to(h);
      fit_hyper.add_to(h);
      return cmd_fit(fit_data, fit_response, fit_arm, fit_train_arm, fit_test, fit_model,
                     fit_sched, fit_hyper, fit_out, fit_summary, h.get());
    }
    if (pred->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("predict"))
          .add("rows", pred_rows)
          .add("samples", pred_samples)
          .add("seed", pred_seed)
          .add("response", pred_response);
      return cmd_predict(pred_draws, pred_rows, pred_out, pred_samples, pred_seed,
                         pred_observed, pred_response, pred_truth, h.get());
    }
    if (pite->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("pite")).add("metric", pite_metric).add("level", pite_level);
      return cmd_pite(pite_t, pite_c, pite_metric, pite_level, pite_out, h.get());
    }
    if (perm->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("permtest"))
          .add("response", perm_response)
          .add("arm", perm_arm)
          .add("n_perm", perm_n)
          .add("metric", perm_metric);
      perm_sched.add_to(h);
      perm_hyper.add_to(h);
      return cmd_permtest(perm_data, perm_response, perm_arm, perm_n, perm_metric,
                          perm_sched, perm_hyper, perm_threads, perm_out, h.get());
    }
    if (bench->parsed()) {
      ConfigHash h;
      h.add("cmd", std::string("benchmark"))
          .add("scenario", bench_scenario)
          .add("models", bench_models)
          .add("replications", bench_reps)
          .add("split", bench_split);
      bench_sched.add_to(h);
      bench_hyper.add_to(h);
      return cmd_benchmark(bench_scenario, bench_reps, bench_models, bench_split,
                           bench_sched, bench_hyper, bench_threads, bench_out, h.get());
    }
    throw ValidationError("no subcommand given");
  } catch (const ValidationError& e) {
    std::cerr << "error[E_VALIDATION]: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "error[E_NUMERIC]: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "error[E_IO]: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error[E_NUMERIC]: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace hobz::cli
