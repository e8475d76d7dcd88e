#pragma once

#include <string>
#include <vector>

#include "sface/dataset.hpp"

namespace sface {

// Column mapping from CSV header names onto dataset roles. weight empty means
// unit weights; aux_covariates are case-only columns for the missingness
// model and may be blank/NA on disease-free rows.
struct CsvSchema {
  std::string exposure;
  std::string outcome;
  std::vector<std::string> covariates;
  std::string weight;
  std::vector<std::string> aux_covariates;
};

struct LoadReport {
  Eigen::Index n_loaded = 0;
  Eigen::Index n_rejected_missing = 0;  // rows dropped for missing covariates
};

// Header row required; separator ','; missing token: empty field or "NA".
// Rows with a missing exposure, outcome, weight, or analysis covariate are
// rejected and counted.
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 LoadReport* report = nullptr);

// Full-precision writer; load_csv(write_csv(d)) reproduces d exactly.
void write_csv(const std::string& path, const Dataset& data,
               const CsvSchema& schema);

// Shortest round-trip decimal rendering (also used by the CSV emitters).
std::string format_double(double v);

}  // namespace sface
