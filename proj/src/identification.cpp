#include "sface/identification.hpp"

#include <algorithm>
#include <cmath>

namespace sface {

Scale parse_scale(const std::string& token) {
  if (token == "diff") return Scale::Diff;
  if (token == "rr") return Scale::RR;
  throw ConfigError("unknown scale '" + token + "' (expected diff or rr)");
}

std::string to_string(Scale s) { return s == Scale::Diff ? "diff" : "rr"; }

void validate_components(const ComponentSet& c, ComponentWarnings* warnings) {
  const auto check = [&](double v, const char* name) {
    if (!std::isfinite(v)) throw DataError(std::string("components: ") + name + " is not finite");
    if (v < -kComponentSlack || v > 1.0 + kComponentSlack)
      throw DataError(std::string("components: ") + name + " = " + std::to_string(v) +
                      " leaves [0,1] beyond the allowed slack");
    if (warnings && (v < 0.0 || v > 1.0))
      warnings->messages.push_back(std::string(name) + " = " + std::to_string(v) +
                                   " outside [0,1] (estimation noise)");
  };
  check(c.p1_0, "p1_0");
  check(c.p1_1, "p1_1");
  check(c.p2_0, "p2_0");
  check(c.p2_1, "p2_1");
  const double s0 = c.p1_0 + c.p2_0, s1 = c.p1_1 + c.p2_1;
  if (s0 > 1.0 + kComponentSlack || s1 > 1.0 + kComponentSlack)
    throw DataError("components: per-arm subtype probabilities sum beyond 1 + slack");
  if (warnings) {
    if (s0 > 1.0) warnings->messages.push_back("p1_0 + p2_0 > 1 (estimation noise)");
    if (s1 > 1.0) warnings->messages.push_back("p1_1 + p2_1 > 1 (estimation noise)");
  }
}

SensitivityParams validate_against(const SensitivityParams& params,
                                   const AssumptionCombo& combo) {
  const auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in01(params.lambda1) || !in01(params.lambda2) || !in01(params.lambda1_0) ||
      !in01(params.lambda2_0))
    throw ConfigError("sensitivity parameters must lie in [0,1]");

  const auto check_subtype = [](Mono m, double lam, double lam0, const char* k) {
    if (m == Mono::SMono && lam != 0.0)
      throw ConfigError(std::string("lambda") + k +
                        " must be 0 under S-Monotonicity for subtype " + k);
    if (m != Mono::None && lam0 != 0.0)
      throw ConfigError(std::string("lambda") + k + "_0 must be 0 unless subtype " + k +
                        " carries no monotonicity assumption");
  };
  check_subtype(combo.subtype1, params.lambda1, params.lambda1_0, "1");
  check_subtype(combo.subtype2, params.lambda2, params.lambda2_0, "2");
  return params;
}

double sface_diff(const ComponentSet& c, const SensitivityParams& params, int subtype) {
  if (subtype != 1 && subtype != 2) throw ConfigError("subtype must be 1 or 2");
  // master difference-scale formula; the off-subtype's (lambda, lambda0) pair
  // enters the denominator, the own pair the numerator survival term
  const double own1 = c.p(subtype, 1);
  const double own0 = c.p(subtype, 0);
  const double oth1 = c.p(3 - subtype, 1);
  const double oth0 = c.p(3 - subtype, 0);
  const double lam_own = subtype == 1 ? params.lambda1 : params.lambda2;
  const double lam_oth = subtype == 1 ? params.lambda2 : params.lambda1;
  const double lam0_oth = subtype == 1 ? params.lambda2_0 : params.lambda1_0;

  const double num = own1 - lam_oth * oth0 - (1.0 - lam_own) * own0;
  const double den = 1.0 - oth1 - lam_oth * oth0 - lam0_oth * oth0;
  if (!(den > 0.0))
    throw DataError("sface_diff: principal-stratum probability is not positive for "
                    "subtype " + std::to_string(subtype) +
                    " (lambda" + std::to_string(3 - subtype) + " or lambda" +
                    std::to_string(3 - subtype) + "_0 too large)");
  return num / den;
}

double sface_rr(const ComponentSet& c, const SensitivityParams& params, int subtype,
                ComponentWarnings* warnings) {
  if (subtype != 1 && subtype != 2) throw ConfigError("subtype must be 1 or 2");
  const double own1 = c.p(subtype, 1);
  const double own0 = c.p(subtype, 0);
  const double oth0 = c.p(3 - subtype, 0);
  const double lam_own = subtype == 1 ? params.lambda1 : params.lambda2;
  const double lam_oth = subtype == 1 ? params.lambda2 : params.lambda1;

  const double num = own1 - lam_oth * oth0;
  const double den = (1.0 - lam_own) * own0;
  if (!(den > 0.0))
    throw DataError("sface_rr: denominator (1 - lambda" + std::to_string(subtype) +
                    ") * p" + std::to_string(subtype) + "_0 is not positive");
  if (num < 0.0 && warnings)
    warnings->messages.push_back(
        "sface_rr subtype " + std::to_string(subtype) + ": numerator negative (lambda" +
        std::to_string(3 - subtype) + " exceeds its data-driven bound)");
  return num / den;
}

double te(const ComponentSet& c, int subtype, Scale scale) {
  if (subtype != 1 && subtype != 2) throw ConfigError("subtype must be 1 or 2");
  const double p1 = c.p(subtype, 1);
  const double p0 = c.p(subtype, 0);
  if (scale == Scale::Diff) return p1 - p0;
  if (!(p0 > 0.0)) throw DataError("te: p" + std::to_string(subtype) + "_0 must be positive on the RR scale");
  return p1 / p0;
}

double theta(double effect1, double effect2) { return effect1 - effect2; }

std::pair<double, double> lambda_bounds(const ComponentSet& c) {
  if (!(c.p2_0 > 0.0) || !(c.p1_0 > 0.0))
    throw DataError("lambda_bounds: p1_0 and p2_0 must be positive");
  return {std::min(1.0, c.p1_1 / c.p2_0), std::min(1.0, c.p2_1 / c.p1_0)};
}

double sface(const ComponentSet& c, const SensitivityParams& params, int subtype,
             Scale scale, ComponentWarnings* warnings) {
  return scale == Scale::Diff ? sface_diff(c, params, subtype)
                              : sface_rr(c, params, subtype, warnings);
}

}  // namespace sface
