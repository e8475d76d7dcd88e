#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "sface/dataset.hpp"

namespace sface {

struct FitOptions {
  double tol = 1e-9;        // gradient max-norm at convergence
  int max_iter = 100;
  double separation_bound = 30.0;  // coefficient max-norm on the logit scale
};

// Logistic model fit; coef(0) is the intercept, the rest follow the design
// column order. Also serves as the propensity model e(x).
struct ExposureModelFit {
  Eigen::VectorXd coef;
  bool converged = false;
  double score_norm = 0.0;
  int iterations = 0;
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  Eigen::MatrixXd info;  // observed information at the optimum

  double intercept() const { return coef(0); }
  Eigen::VectorXd slopes() const { return coef.tail(coef.size() - 1); }
};

// Three-category multinomial fit, baseline category 0. Row k-1 of coef holds
// [alpha_k, beta_k, gamma_k...] for subtype k.
struct OutcomeModelFit {
  Eigen::MatrixXd coef;  // 2 x (2 + n_covariates)
  bool converged = false;
  double score_norm = 0.0;
  int iterations = 0;
  double loglik = 0.0;
  std::vector<double> loglik_trace;
  Eigen::MatrixXd info;

  Eigen::Index n_covariates() const { return coef.cols() - 2; }
};

// Design-matrix level fitters. X must contain the intercept column.
ExposureModelFit fit_logistic_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& w, const FitOptions& opt = {},
                                     const Eigen::VectorXd* warm_start = nullptr);

// Propensity fit on [1, covariates] with the dataset's exposure as response.
ExposureModelFit fit_logistic(const Dataset& data, const FitOptions& opt = {},
                              const Eigen::VectorXd* warm_start = nullptr);

// Outcome fit on [1, A, covariates]; requires outcome codes in {0,1,2} with
// every category carrying positive weight.
OutcomeModelFit fit_multinomial(const Dataset& data, const FitOptions& opt = {},
                                const Eigen::MatrixXd* warm_start = nullptr);

// pi_k(a, x) for k = 0, 1, 2.
std::array<double, 3> predict_pi(const OutcomeModelFit& fit, int a,
                                 const Eigen::VectorXd& x);
// Columns pi_0, pi_1, pi_2 for every row of the dataset at exposure arm a.
Eigen::MatrixX3d predict_pi_all(const OutcomeModelFit& fit, int a, const Dataset& data);

double predict_e(const ExposureModelFit& fit, const Eigen::VectorXd& x);
Eigen::VectorXd predict_e_all(const ExposureModelFit& fit, const Dataset& data);

// Weighted log-likelihoods and analytic scores at arbitrary parameter values
// (exposed for the finite-difference gradient checks).
double logistic_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& w, const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w, const Eigen::VectorXd& beta);
double multinomial_loglik(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                          const Eigen::VectorXd& w, const Eigen::MatrixXd& theta);
Eigen::VectorXd multinomial_score(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                                  const Eigen::VectorXd& w, const Eigen::MatrixXd& theta);

// Running tally of fit calls; lets tests assert that nuisance models are
// fitted exactly once per bootstrap replicate regardless of grid size.
struct FitCounters {
  std::uint64_t logistic = 0;
  std::uint64_t multinomial = 0;
};
FitCounters fit_counters();

// Fit summary serialization (coefficients + convergence diagnostics).
std::string to_json(const ExposureModelFit& fit, const std::vector<std::string>& names);
std::string to_json(const OutcomeModelFit& fit, const std::vector<std::string>& names);

}  // namespace sface
