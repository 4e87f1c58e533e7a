#ifndef HOBZ_IO_HPP
#define HOBZ_IO_HPP

#include <string>

#include "hobz/dataset.hpp"
#include "hobz/draws.hpp"
#include "hobz/simgen.hpp"

namespace hobz {

// Reads a headered CSV: `response_col` becomes y (validated to [0,1]),
// `arm_col` (optional) becomes the two-arm labels, every other column must be
// numeric and becomes a covariate. Missing or non-numeric cells raise
// ValidationError naming the row and column.
Dataset ingest_csv(const std::string& path, const std::string& response_col = "y",
                   const std::string& arm_col = "");

// Reads the covariate columns of a headered CSV in `column_names` order;
// extra columns (for example a response) are ignored.
Matrix ingest_csv_matrix(const std::string& path,
                         const std::vector<std::string>& column_names);

// Writes covariates, response, and arm labels (when present) with full
// round-trip precision.
void write_dataset_csv(const std::string& path, const Dataset& data);

void write_truth_csv(const std::string& path, const SimTruth& truth);

// Binary columnar draw file: "HOBZ1" magic, version, seed, config hash,
// schedule, then length-prefixed little-endian f64 sections. write/read/write
// is a fixed point.
void write_draws(const std::string& path, const PosteriorDraws& draws);
PosteriorDraws read_draws(const std::string& path);

// Full-precision decimal formatting shared by every CSV writer.
std::string format_double(double v);

}  // namespace hobz

#endif
