#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "sface/errors.hpp"

namespace sface {

// Outcome codes: 0 disease-free, 1/2 the two subtypes, 9 diseased with the
// subtype unknown (removed by missingness weighting before any model fit).
constexpr int kOutcomeFree = 0;
constexpr int kOutcomeSubtype1 = 1;
constexpr int kOutcomeSubtype2 = 2;
constexpr int kOutcomeUnknown = 9;

// Column-major analysis dataset. Immutable after construction; shared freely
// across parallel workers.
class Dataset {
 public:
  // aux holds case-only columns (e.g. predictors of subtype availability);
  // NaN entries are allowed there and only there.
  static Dataset create(Eigen::VectorXd exposure, Eigen::MatrixXd covariates,
                        Eigen::VectorXi outcome, Eigen::VectorXd weight,
                        std::vector<std::string> covariate_names,
                        Eigen::MatrixXd aux = {},
                        std::vector<std::string> aux_names = {});

  Eigen::Index n() const { return outcome_.size(); }
  Eigen::Index n_covariates() const { return covariates_.cols(); }

  const Eigen::VectorXd& exposure() const { return exposure_; }
  const Eigen::MatrixXd& covariates() const { return covariates_; }
  const Eigen::VectorXi& outcome() const { return outcome_; }
  const Eigen::VectorXd& weight() const { return weight_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const Eigen::MatrixXd& aux() const { return aux_; }
  const std::vector<std::string>& aux_names() const { return aux_names_; }

  double weight_sum() const { return weight_.sum(); }
  bool has_unknown_subtype() const;
  // 1{outcome == k} for k in {1, 2}.
  Eigen::VectorXd subtype_indicator(int k) const;

  // Row gather, used by the bootstrap. Weights and aux travel with the row.
  Dataset resample(const std::vector<Eigen::Index>& idx) const;
  Dataset with_weights_and_rows(const Eigen::VectorXd& new_weight,
                                const std::vector<Eigen::Index>& keep) const;

  // Column lookup over covariates then aux; throws DataError when absent.
  Eigen::VectorXd column(const std::string& name) const;

 private:
  Dataset() = default;
  Eigen::VectorXd exposure_;
  Eigen::MatrixXd covariates_;
  Eigen::VectorXi outcome_;
  Eigen::VectorXd weight_;
  std::vector<std::string> covariate_names_;
  Eigen::MatrixXd aux_;
  std::vector<std::string> aux_names_;
};

struct MissingnessModelSpec {
  std::vector<std::string> covariate_names;  // empty = intercept-only
  double truncation_quantile = 0.99;
};

struct MissingnessSummary {
  Eigen::Index n_diseased = 0;
  Eigen::Index n_unknown_removed = 0;
  double truncation_value = 0.0;
  Eigen::Index n_truncated = 0;
  double max_weight = 0.0;
  double raw_weight_sum = 0.0;  // before truncation, observed-subtype cases
};

// Fits P(subtype observed | diseased) by weighted logistic regression, turns
// observed-subtype cases into 1/p weights truncated at the spec quantile of
// the raw weights, drops code-9 rows, and leaves disease-free weights alone.
Dataset missingness_weights(const Dataset& data, const MissingnessModelSpec& spec,
                            MissingnessSummary* summary = nullptr);

// Linear-interpolation (type-7) empirical quantile, q in (0, 1].
double quantile_type7(std::vector<double> values, double q);

}  // namespace sface
