#pragma once

#include <string>
#include <utility>
#include <vector>

#include "sface/errors.hpp"
#include "sface/monotonicity.hpp"

namespace sface {

enum class Scale { Diff, RR };

Scale parse_scale(const std::string& token);
std::string to_string(Scale s);

// The four marginal counterfactual probabilities p_k(a) = P[Y^(k)(a) = 1].
// Every effect in scope is a closed-form function of these.
struct ComponentSet {
  double p1_0 = 0.0, p1_1 = 0.0, p2_0 = 0.0, p2_1 = 0.0;

  double p(int subtype, int a) const {
    return subtype == 1 ? (a == 0 ? p1_0 : p1_1) : (a == 0 ? p2_0 : p2_1);
  }
};

// Validation slack for IPTW estimation noise breaching the simplex.
constexpr double kComponentSlack = 0.01;

struct ComponentWarnings {
  std::vector<std::string> messages;
  bool any() const { return !messages.empty(); }
};

// Errors when any marginal or the per-arm sum leaves [0,1] by more than the
// slack; softer breaches are recorded as warnings.
void validate_components(const ComponentSet& c, ComponentWarnings* warnings = nullptr);

// Sensitivity parameters: subtype-switching probabilities lambda_k and the
// disease-free-under-exposure probabilities lambda_k^0 (nonzero only when no
// monotonicity is assumed for subtype k).
struct SensitivityParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double lambda1_0 = 0.0;
  double lambda2_0 = 0.0;
};

// Enforces the combo's zero-constraints exactly; returns params unchanged.
SensitivityParams validate_against(const SensitivityParams& params,
                                   const AssumptionCombo& combo);

// Difference-scale SF-ACE for the given subtype from the master formula that
// needs no monotonicity assumption; with the combo-implied zeros it reduces
// to the stronger-assumption special cases exactly.
double sface_diff(const ComponentSet& c, const SensitivityParams& params, int subtype);

// Risk-ratio-scale SF-ACE. lambda^0 does not enter. A negative numerator
// (lambda beyond its data-driven bound) is reported through warnings.
double sface_rr(const ComponentSet& c, const SensitivityParams& params, int subtype,
                ComponentWarnings* warnings = nullptr);

// Total effect of the exposure on subtype k.
double te(const ComponentSet& c, int subtype, Scale scale);

// Effect heterogeneity contrast.
double theta(double effect1, double effect2);

// Data-driven upper bounds (lambda1_max, lambda2_max).
std::pair<double, double> lambda_bounds(const ComponentSet& c);

double sface(const ComponentSet& c, const SensitivityParams& params, int subtype,
             Scale scale, ComponentWarnings* warnings = nullptr);

}  // namespace sface
