#include "hobz/io.hpp"

#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "hobz/errors.hpp"
#include "hobz/version.hpp"

static_assert(std::endian::native == std::endian::little,
              "draw files are little-endian; big-endian hosts are unsupported");

namespace hobz {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, std::size_t row, const std::string& col) {
  const char* b = cell.data();
  const char* e = b + cell.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (*(e - 1) == ' ' || *(e - 1) == '\t')) --e;
  if (b == e)
    throw ValidationError("csv: missing value at data row " + std::to_string(row) +
                          ", column '" + col + "' (imputation is out of scope)");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e)
    throw ValidationError("csv: non-numeric cell '" + std::string(b, e) +
                          "' at data row " + std::to_string(row) + ", column '" + col +
                          "'");
  if (!std::isfinite(v))
    throw ValidationError("csv: non-finite value at data row " + std::to_string(row) +
                          ", column '" + col + "'");
  return v;
}

struct RawCsv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

RawCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  RawCsv csv;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("csv: '" + path + "' has no header row");
  csv.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != csv.header.size())
      throw ValidationError("csv: row " + std::to_string(csv.rows.size()) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(csv.header.size()));
    csv.rows.push_back(std::move(cells));
  }
  return csv;
}

}  // namespace

Dataset ingest_csv(const std::string& path, const std::string& response_col,
                   const std::string& arm_col) {
  const RawCsv csv = read_csv(path);
  std::ptrdiff_t y_idx = -1, arm_idx = -1;
  std::vector<std::size_t> cov_idx;
  std::vector<std::string> cov_names;
  for (std::size_t j = 0; j < csv.header.size(); ++j) {
    if (csv.header[j] == response_col) {
      y_idx = static_cast<std::ptrdiff_t>(j);
    } else if (!arm_col.empty() && csv.header[j] == arm_col) {
      arm_idx = static_cast<std::ptrdiff_t>(j);
    } else {
      cov_idx.push_back(j);
      cov_names.push_back(csv.header[j]);
    }
  }
  if (y_idx < 0)
    throw ValidationError("csv: response column '" + response_col + "' not found in '" +
                          path + "'");
  if (!arm_col.empty() && arm_idx < 0)
    throw ValidationError("csv: arm column '" + arm_col + "' not found in '" + path + "'");
  if (cov_idx.empty()) throw ValidationError("csv: no covariate columns in '" + path + "'");

  const std::size_t n = csv.rows.size();
  Matrix x(n, cov_idx.size());
  std::vector<double> y(n);
  std::vector<std::string> arm_raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = parse_cell(csv.rows[i][y_idx], i, response_col);
    if (y[i] < 0.0 || y[i] > 1.0)
      throw ValidationError("csv: response " + format_double(y[i]) + " outside [0,1] at data row " +
                            std::to_string(i));
    for (std::size_t k = 0; k < cov_idx.size(); ++k)
      x.at(i, k) = parse_cell(csv.rows[i][cov_idx[k]], i, cov_names[k]);
    if (arm_idx >= 0) arm_raw[i] = csv.rows[i][arm_idx];
  }

  Dataset d = Dataset::from_xy(std::move(x), std::move(y));
  d.column_names = std::move(cov_names);

  if (arm_idx >= 0) {
    std::map<std::string, int> labels;
    for (const std::string& a : arm_raw) labels.emplace(a, 0);
    if (labels.size() != 2)
      throw ValidationError("csv: arm column '" + arm_col + "' must have exactly 2 labels, found " +
                            std::to_string(labels.size()));
    int next = 0;
    for (auto& [name, id] : labels) id = next++;  // sorted order: first label = 0
    d.arm.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.arm[i] = static_cast<std::int8_t>(labels[arm_raw[i]]);
    for (const auto& [name, id] : labels) (id == 0 ? d.arm_name_0 : d.arm_name_1) = name;
  }
  return d;
}

Matrix ingest_csv_matrix(const std::string& path,
                         const std::vector<std::string>& column_names) {
  const RawCsv csv = read_csv(path);
  std::vector<std::size_t> idx;
  for (const std::string& want : column_names) {
    bool found = false;
    for (std::size_t j = 0; j < csv.header.size(); ++j) {
      if (csv.header[j] == want) {
        idx.push_back(j);
        found = true;
        break;
      }
    }
    if (!found)
      throw ValidationError("csv: required column '" + want + "' not found in '" + path + "'");
  }
  Matrix x(csv.rows.size(), idx.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i)
    for (std::size_t k = 0; k < idx.size(); ++k)
      x.at(i, k) = parse_cell(csv.rows[i][idx[k]], i, column_names[k]);
  return x;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < data.n_cols(); ++j) {
    const std::string name =
        j < data.column_names.size() ? data.column_names[j] : "x" + std::to_string(j + 1);
    out << name << ',';
  }
  out << 'y';
  if (!data.arm.empty()) out << ",arm";
  out << '\n';
  for (std::size_t i = 0; i < data.n_rows(); ++i) {
    for (std::size_t j = 0; j < data.n_cols(); ++j) out << format_double(data.x.at(i, j)) << ',';
    out << format_double(data.y[i]);
    if (!data.arm.empty())
      out << ',' << (data.arm[i] == 0 ? data.arm_name_0 : data.arm_name_1);
    out << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_truth_csv(const std::string& path, const SimTruth& truth) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "theta1,theta0,lambda,d1,d2,expected_y\n";
  for (std::size_t i = 0; i < truth.theta1.size(); ++i) {
    out << format_double(truth.theta1[i]) << ',' << format_double(truth.theta0[i]) << ','
        << format_double(truth.lambda[i]) << ',' << int(truth.d1[i]) << ','
        << int(truth.d2[i]) << ',' << format_double(truth.expected_y[i]) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace {

constexpr char kMagic[5] = {'H', 'O', 'B', 'Z', '1'};

enum SectionId : std::uint32_t {
  kKappa = 1,
  kF1Train = 2,
  kF0Train = 3,
  kFbTrain = 4,
  kF1Test = 5,
  kF0Test = 6,
  kFbTest = 7,
};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw IoError("draw file: truncated read");
  return v;
}

void put_section(std::ofstream& out, std::uint32_t id, const std::vector<double>& v) {
  put(out, id);
  put(out, static_cast<std::uint64_t>(v.size()));
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

}  // namespace

void write_draws(const std::string& path, const PosteriorDraws& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(kMagic, sizeof kMagic);
  put(out, kDrawFileVersion);
  put(out, d.seed);
  put(out, d.config_hash);
  put(out, d.iterations);
  put(out, d.burn_in);
  put(out, d.thin);
  put(out, d.num_trees);
  put(out, d.n_train);
  put(out, d.n_test);
  put(out, d.num_draws);
  const std::uint32_t n_sections = d.n_test > 0 ? 7 : 4;
  put(out, n_sections);
  put_section(out, kKappa, d.kappa);
  put_section(out, kF1Train, d.f1_train);
  put_section(out, kF0Train, d.f0_train);
  put_section(out, kFbTrain, d.fb_train);
  if (d.n_test > 0) {
    put_section(out, kF1Test, d.f1_test);
    put_section(out, kF0Test, d.f0_test);
    put_section(out, kFbTest, d.fb_test);
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

PosteriorDraws read_draws(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  char magic[5];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw IoError("'" + path + "' is not a HOBZ1 draw file");
  const auto version = get<std::uint32_t>(in);
  if (version != kDrawFileVersion)
    throw IoError("draw file version " + std::to_string(version) + " is unsupported");
  PosteriorDraws d;
  d.seed = get<std::uint64_t>(in);
  d.config_hash = get<std::uint64_t>(in);
  d.iterations = get<std::uint32_t>(in);
  d.burn_in = get<std::uint32_t>(in);
  d.thin = get<std::uint32_t>(in);
  d.num_trees = get<std::uint32_t>(in);
  d.n_train = get<std::uint32_t>(in);
  d.n_test = get<std::uint32_t>(in);
  d.num_draws = get<std::uint32_t>(in);
  const auto n_sections = get<std::uint32_t>(in);
  for (std::uint32_t s = 0; s < n_sections; ++s) {
    const auto id = get<std::uint32_t>(in);
    const auto count = get<std::uint64_t>(in);
    std::vector<double> payload(count);
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw IoError("draw file: truncated section " + std::to_string(id));
    switch (id) {
      case kKappa: d.kappa = std::move(payload); break;
      case kF1Train: d.f1_train = std::move(payload); break;
      case kF0Train: d.f0_train = std::move(payload); break;
      case kFbTrain: d.fb_train = std::move(payload); break;
      case kF1Test: d.f1_test = std::move(payload); break;
      case kF0Test: d.f0_test = std::move(payload); break;
      case kFbTest: d.fb_test = std::move(payload); break;
      default: throw IoError("draw file: unknown section id " + std::to_string(id));
    }
  }
  const auto expect = [&](std::size_t got, std::size_t want, const char* what) {
    if (got != want)
      throw IoError("draw file: section '" + std::string(what) + "' has " +
                    std::to_string(got) + " values, expected " + std::to_string(want));
  };
  expect(d.kappa.size(), d.num_draws, "kappa");
  expect(d.f1_train.size(), std::size_t{d.num_draws} * d.n_train, "f1_train");
  expect(d.f0_train.size(), std::size_t{d.num_draws} * d.n_train, "f0_train");
  expect(d.fb_train.size(), std::size_t{d.num_draws} * d.n_train, "fb_train");
  expect(d.f1_test.size(), std::size_t{d.num_draws} * d.n_test, "f1_test");
  expect(d.f0_test.size(), std::size_t{d.num_draws} * d.n_test, "f0_test");
  expect(d.fb_test.size(), std::size_t{d.num_draws} * d.n_test, "fb_test");
  return d;
}

}  // namespace hobz
