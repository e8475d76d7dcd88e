#include "sface/dataset.hpp"

#include <algorithm>
#include <cmath>

#include "sface/glm.hpp"

namespace sface {

Dataset Dataset::create(Eigen::VectorXd exposure, Eigen::MatrixXd covariates,
                        Eigen::VectorXi outcome, Eigen::VectorXd weight,
                        std::vector<std::string> covariate_names,
                        Eigen::MatrixXd aux, std::vector<std::string> aux_names) {
  const Eigen::Index n = outcome.size();
  if (n < 1) throw DataError("Dataset: empty dataset");
  if (exposure.size() != n || weight.size() != n || covariates.rows() != n)
    throw DataError("Dataset: column length mismatch");
  if (static_cast<Eigen::Index>(covariate_names.size()) != covariates.cols())
    throw DataError("Dataset: covariate name count does not match columns");
  if (aux.size() > 0 && aux.rows() != n)
    throw DataError("Dataset: aux column length mismatch");
  if (static_cast<Eigen::Index>(aux_names.size()) != aux.cols())
    throw DataError("Dataset: aux name count does not match columns");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (exposure(i) != 0.0 && exposure(i) != 1.0)
      throw DataError("Dataset: non-binary exposure at row " + std::to_string(i + 1));
    const int y = outcome(i);
    if (y != kOutcomeFree && y != kOutcomeSubtype1 && y != kOutcomeSubtype2 &&
        y != kOutcomeUnknown)
      throw DataError("Dataset: unknown outcome code " + std::to_string(y) +
                      " at row " + std::to_string(i + 1));
    if (!(weight(i) >= 0.0))
      throw DataError("Dataset: negative weight at row " + std::to_string(i + 1));
    if (!covariates.row(i).allFinite())
      throw DataError("Dataset: non-finite covariate at row " + std::to_string(i + 1));
  }
  Dataset d;
  d.exposure_ = std::move(exposure);
  d.covariates_ = std::move(covariates);
  d.outcome_ = std::move(outcome);
  d.weight_ = std::move(weight);
  d.covariate_names_ = std::move(covariate_names);
  d.aux_ = std::move(aux);
  d.aux_names_ = std::move(aux_names);
  return d;
}

bool Dataset::has_unknown_subtype() const {
  for (Eigen::Index i = 0; i < n(); ++i)
    if (outcome_(i) == kOutcomeUnknown) return true;
  return false;
}

Eigen::VectorXd Dataset::subtype_indicator(int k) const {
  Eigen::VectorXd v(n());
  for (Eigen::Index i = 0; i < n(); ++i) v(i) = outcome_(i) == k ? 1.0 : 0.0;
  return v;
}

Dataset Dataset::resample(const std::vector<Eigen::Index>& idx) const {
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  Dataset d;
  d.exposure_.resize(m);
  d.covariates_.resize(m, covariates_.cols());
  d.outcome_.resize(m);
  d.weight_.resize(m);
  if (aux_.size() > 0) d.aux_.resize(m, aux_.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = idx[r];
    d.exposure_(r) = exposure_(i);
    d.covariates_.row(r) = covariates_.row(i);
    d.outcome_(r) = outcome_(i);
    d.weight_(r) = weight_(i);
    if (aux_.size() > 0) d.aux_.row(r) = aux_.row(i);
  }
  d.covariate_names_ = covariate_names_;
  d.aux_names_ = aux_names_;
  return d;
}

Dataset Dataset::with_weights_and_rows(const Eigen::VectorXd& new_weight,
                                       const std::vector<Eigen::Index>& keep) const {
  Dataset d = resample(keep);
  for (Eigen::Index r = 0; r < d.n(); ++r) d.weight_(r) = new_weight(keep[r]);
  return d;
}

Eigen::VectorXd Dataset::column(const std::string& name) const {
  for (size_t j = 0; j < covariate_names_.size(); ++j)
    if (covariate_names_[j] == name) return covariates_.col(static_cast<Eigen::Index>(j));
  for (size_t j = 0; j < aux_names_.size(); ++j)
    if (aux_names_[j] == name) return aux_.col(static_cast<Eigen::Index>(j));
  throw DataError("Dataset: no column named '" + name + "'");
}

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile: empty sample");
  if (!(q > 0.0) || !(q <= 1.0)) throw DataError("quantile: q must be in (0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

Dataset missingness_weights(const Dataset& data, const MissingnessModelSpec& spec,
                            MissingnessSummary* summary) {
  if (!(spec.truncation_quantile > 0.0) || !(spec.truncation_quantile <= 1.0))
    throw DataError("missingness_weights: truncation_quantile must be in (0, 1]");

  std::vector<Eigen::Index> diseased;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int y = data.outcome()(i);
    if (y == kOutcomeSubtype1 || y == kOutcomeSubtype2 || y == kOutcomeUnknown)
      diseased.push_back(i);
  }
  if (diseased.empty()) throw DataError("missingness_weights: no diseased units");

  const Eigen::Index nd = static_cast<Eigen::Index>(diseased.size());
  const Eigen::Index p = static_cast<Eigen::Index>(spec.covariate_names.size());
  Eigen::MatrixXd X(nd, 1 + p);
  X.col(0).setOnes();
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::VectorXd col = data.column(spec.covariate_names[j]);
    for (Eigen::Index r = 0; r < nd; ++r) {
      const double v = col(diseased[r]);
      if (!std::isfinite(v))
        throw DataError("missingness_weights: missing value in column '" +
                        spec.covariate_names[j] + "' for diseased row " +
                        std::to_string(diseased[r] + 1));
      X(r, 1 + j) = v;
    }
  }
  Eigen::VectorXd obs(nd), w(nd);
  Eigen::Index n_unknown = 0;
  for (Eigen::Index r = 0; r < nd; ++r) {
    const bool observed = data.outcome()(diseased[r]) != kOutcomeUnknown;
    obs(r) = observed ? 1.0 : 0.0;
    if (!observed) ++n_unknown;
    w(r) = data.weight()(diseased[r]);
  }

  MissingnessSummary sm;
  sm.n_diseased = nd;
  sm.n_unknown_removed = n_unknown;

  Eigen::VectorXd raw = Eigen::VectorXd::Ones(data.n());
  if (n_unknown == 0) {
    // every diseased unit has an observed subtype: weights stay 1
    sm.truncation_value = 1.0;
    sm.max_weight = 1.0;
    sm.raw_weight_sum = static_cast<double>(nd);
    if (summary) *summary = sm;
    std::vector<Eigen::Index> keep(static_cast<size_t>(data.n()));
    for (Eigen::Index i = 0; i < data.n(); ++i) keep[static_cast<size_t>(i)] = i;
    return data.with_weights_and_rows(data.weight(), keep);
  }

  const ExposureModelFit fit = fit_logistic_design(X, obs, w);

  std::vector<double> raw_obs;
  for (Eigen::Index r = 0; r < nd; ++r) {
    if (obs(r) != 1.0) continue;
    double eta = fit.coef(0);
    for (Eigen::Index j = 0; j < p; ++j) eta += fit.coef(1 + j) * X(r, 1 + j);
    const double prob = 1.0 / (1.0 + std::exp(-eta));
    const double rw = 1.0 / prob;
    raw(diseased[r]) = rw;
    raw_obs.push_back(rw);
  }
  sm.raw_weight_sum = 0.0;
  for (double v : raw_obs) sm.raw_weight_sum += v;
  sm.truncation_value = quantile_type7(raw_obs, spec.truncation_quantile);

  Eigen::VectorXd new_w = data.weight();
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<size_t>(data.n() - n_unknown));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int y = data.outcome()(i);
    if (y == kOutcomeUnknown) continue;
    if (y == kOutcomeSubtype1 || y == kOutcomeSubtype2) {
      double rw = raw(i);
      if (rw > sm.truncation_value) {
        rw = sm.truncation_value;
        ++sm.n_truncated;
      }
      new_w(i) = data.weight()(i) * rw;
      sm.max_weight = std::max(sm.max_weight, new_w(i));
    }
    keep.push_back(i);
  }
  if (summary) *summary = sm;
  return data.with_weights_and_rows(new_w, keep);
}

}  // namespace sface
