#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sface/dataset.hpp"
#include "sface/estimators.hpp"
#include "sface/glm.hpp"
#include "sface/identification.hpp"

namespace sface {

// Phi^{-1}(0.975) pinned in double precision.
constexpr double kZ975 = 1.959964;

double normal_cdf(double x);
double normal_quantile(double p);  // AS241-style rational approximation

// Two-sided normal p-value for H0: theta = 0.
double theta_test(double theta_hat, double se);

enum class Estimand { SFACE1, SFACE2, Theta, TE1, TE2, Conditional1, Conditional2 };
std::string to_string(Estimand e);

struct EstimandKey {
  Estimand estimand;
  Scale scale;
  Method method;
  auto operator<=>(const EstimandKey&) const = default;
};

// What to fit and how; the estimation closure the bootstrap re-runs.
struct EstimationSpec {
  std::vector<Method> methods = {Method::Standardization, Method::Iptw, Method::Dr};
  std::optional<MissingnessModelSpec> missingness;
  bool want_conditional = true;
  EstimatorOptions estimator;
  FitOptions fit;
};

// Everything one pipeline pass produces: per-method ComponentSets plus the
// conditional estimands (lambda-free material the identification layer maps
// to effects afterwards).
struct FittedComponents {
  std::map<Method, ComponentSet> components;
  std::optional<double> cond1, cond2;
  std::optional<OutcomeModelFit> outcome_fit;
  std::optional<ExposureModelFit> exposure_fit;
  MissingnessSummary missingness;
  bool missingness_applied = false;
  EstimatorDiagnostics iptw_diag, dr_diag;
};

// Runs missingness weighting (when configured and apply_missingness is set),
// the model fits, and the component estimators. warm, when given, seeds the
// Newton iterations with the original-data coefficients.
FittedComponents run_pipeline(const Dataset& data, const EstimationSpec& spec,
                              bool apply_missingness = true,
                              const FittedComponents* warm = nullptr);

struct BootstrapPlan {
  int n_reps = 200;
  std::uint64_t seed = 0;
  bool refit_missingness = true;
};

struct BootstrapComponents {
  FittedComponents point;
  std::vector<std::optional<FittedComponents>> replicates;  // nullopt = failed
  std::vector<std::string> failure_notes;
  int n_failed = 0;
};

// Resamples n rows with replacement from the pre-weighting dataset and reruns
// the full pipeline per replicate. Replicate r draws from a stream spawned as
// (seed, r), so results do not depend on thread count or execution order.
// Errors when more than max_failure_fraction of replicates fail.
BootstrapComponents bootstrap_components(const Dataset& data, const EstimationSpec& spec,
                                         const BootstrapPlan& plan,
                                         double max_failure_fraction = 0.10);

struct EffectEstimate {
  Estimand estimand;
  Scale scale;
  Method method;
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n_boot = 0;   // replicates contributing to the SE
  std::uint64_t seed = 0;
};

struct CellRequest {
  AssumptionCombo combo;
  SensitivityParams params;
  std::vector<Scale> scales = {Scale::Diff, Scale::RR};
  std::vector<Method> methods = {Method::Standardization, Method::Iptw, Method::Dr};
  bool want_te = true;
  bool want_conditional = true;
};

// Identification layer applied to one set of fitted components. Values that
// cannot be formed (nonpositive stratum denominator under the requested
// lambdas) come back empty; notes says why.
std::vector<std::pair<EstimandKey, std::optional<double>>> evaluate_cell(
    const FittedComponents& fc, const CellRequest& req,
    std::vector<std::string>* notes = nullptr);

// Point estimates from the original data plus bootstrap SEs and Wald CIs.
// Replicates whose cell evaluation fails are dropped per estimand and
// counted in dropped (aligned with the returned vector).
std::vector<EffectEstimate> summarize_effects(const BootstrapComponents& boot,
                                              const CellRequest& req,
                                              const BootstrapPlan& plan,
                                              std::vector<int>* dropped = nullptr);

// Replicate-level estimand values in replicate order (diagnostics dump).
std::vector<std::pair<EstimandKey, std::vector<std::optional<double>>>>
replicate_values(const BootstrapComponents& boot, const CellRequest& req);

}  // namespace sface
