#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sface/dataset.hpp"
#include "sface/inference.hpp"

namespace sface {

// Generating-model parameters. Defaults are the Study I values: baseline
// multinomial intercepts/effects, a latent N(0,1) common cause loading on
// both subtypes, and a logistic exposure model.
struct DGMParams {
  double alpha1 = std::log(0.05);
  double alpha2 = std::log(0.005);
  double beta1 = std::log(2.0);
  double beta2 = std::log(2.0);
  std::array<double, 2> gamma1 = {std::log(0.25), std::log(2.0)};
  std::array<double, 2> gamma2 = {std::log(2.0), std::log(2.0)};
  double delta1 = std::log(2.0);
  double delta2 = std::log(2.0);
  double phi = std::log(0.7);
  std::array<double, 2> psi = {std::log(2.0), std::log(2.0)};
};

// Assigns a parameter by path: alpha1, beta2, gamma2[1], psi[0], ...
void set_dgm_param(DGMParams& params, const std::string& path, double value);

enum class Misspec { None, Exposure, Outcome, Both };
Misspec parse_misspec(const std::string& token);
std::string to_string(Misspec m);

// Covariates are X1 ~ Bernoulli(0.5) and X2 ~ Normal(0,1); the misspecified
// scenarios replace X2 by log|X2| inside the named generating linear
// predictors while the recorded covariate stays X2.
struct GenFlags {
  bool outcome_logx2 = false;
  bool exposure_logx2 = false;
  static GenFlags from(Misspec m) {
    return {m == Misspec::Outcome || m == Misspec::Both,
            m == Misspec::Exposure || m == Misspec::Both};
  }
};

// A generated cohort plus the full potential-outcome table (y0, y1 codes).
struct Population {
  Dataset data;
  std::vector<std::array<std::int8_t, 2>> po;
};

// Draws Y(0) from the outcome model, then Y(1) from the total-probability-
// adjusted conditional so subtype monotonicity holds for both subtypes by
// construction, then the exposure; the observed outcome follows consistency.
Population simulate_population(const DGMParams& params, std::int64_t n,
                               std::uint64_t seed, const GenFlags& flags = {});

struct TrueEffects {
  double sface1_d = 0, sface2_d = 0, sface1_rr = 0, sface2_rr = 0;
  double te1_d = 0, te2_d = 0, te1_rr = 0, te2_rr = 0;
  double theta_d = 0, theta_rr = 0;
  double se_sface1_d = 0, se_sface2_d = 0;  // Monte-Carlo standard errors
  double prev1 = 0, prev2 = 0, prev_exposed = 0;
  std::int64_t n_mc = 0;

  double sface(int subtype, Scale s) const {
    return subtype == 1 ? (s == Scale::Diff ? sface1_d : sface1_rr)
                        : (s == Scale::Diff ? sface2_d : sface2_rr);
  }
};

// Definition-based truths on a streamed Monte-Carlo population: stratum means
// over the retained potential outcomes, never identification formulas.
TrueEffects true_effects(const DGMParams& params, std::int64_t n_mc, std::uint64_t seed,
                         const GenFlags& flags = {});

enum class Study { I, II, III };
Study parse_study(const std::string& token);
std::string to_string(Study s);

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

struct StudySpec {
  Study study = Study::I;
  std::int64_t n = 10000;
  int n_sims = 500;
  int boot_reps = 200;
  std::uint64_t seed = 0;
  Misspec misspec = Misspec::None;  // Study III only
  std::optional<SweepSpec> sweep;   // Study II; defaults to gamma2[1] column
  std::int64_t n_mc_truth = 10000000;
  DrAugmentation dr_augmentation = DrAugmentation::Unit;
};

struct MetricsRow {
  double sweep_value = 0.0;
  Misspec misspec = Misspec::None;
  Estimand estimand = Estimand::SFACE1;
  Method method = Method::Standardization;
  Scale scale = Scale::Diff;
  double truth = 0.0;  // the true SF-ACE (or theta) this row is judged against
  double bias = 0.0;
  double pct_bias = 0.0;
  double cp95 = 0.0;     // NaN when the study ran without bootstrap
  double emp_sd = 0.0;
  double mean_est_se = 0.0;  // NaN without bootstrap
  int n_sims = 0;
};

struct StudyResult {
  std::vector<MetricsRow> rows;
  std::vector<TrueEffects> truths;      // one per sweep point
  std::vector<double> sweep_values;
  std::string sweep_param;
  int n_failed_sims = 0;
};

// Runs the requested study: per repetition the three SF-ACE estimators plus
// the standardization TE and conditional baselines, bootstrap inference when
// boot_reps >= 2, and bias/coverage metrics against the streamed truths.
// Repetition r always uses the same population stream regardless of sweep
// point, so sweep contrasts are common-random-number coupled.
StudyResult run_study(const StudySpec& spec, const DGMParams& base);

// Study-table CSV; difference-scale magnitudes are reported per 100,000.
std::string metrics_csv(const StudyResult& result, const StudySpec& spec);

}  // namespace sface
