#pragma once

#include <string>

#include "sface/dataset.hpp"
#include "sface/glm.hpp"
#include "sface/identification.hpp"

namespace sface {

enum class Method { Standardization, Iptw, Dr };

Method parse_method(const std::string& token);  // "stand" | "iptw" | "dr"
std::string to_string(Method m);

// Which augmentation the DR estimator uses: Mean is the published expression
// (sample-average outcome prediction); Unit is the conventional AIPW with the
// per-unit prediction, the form that is actually doubly robust.
enum class DrAugmentation { Mean, Unit };

struct EstimatorOptions {
  double clip_low = 0.01;   // propensity clipping bounds
  double clip_high = 0.99;
  DrAugmentation dr_augmentation = DrAugmentation::Mean;
  // Reproduces the a=0 augmentation exactly as printed (which reuses the
  // a=1 outcome predictions) instead of the corrected m_k0 form.
  bool dr_a0_literal = false;
};

struct EstimatorDiagnostics {
  Eigen::Index n_clipped = 0;  // units whose propensity hit the clip bounds
};

ComponentSet components_standardization(const OutcomeModelFit& fit, const Dataset& data);

ComponentSet components_iptw(const ExposureModelFit& fit, const Dataset& data,
                             const EstimatorOptions& opt = {},
                             EstimatorDiagnostics* diag = nullptr);

ComponentSet components_dr(const OutcomeModelFit& fit_y, const ExposureModelFit& fit_a,
                           const Dataset& data, const EstimatorOptions& opt = {},
                           EstimatorDiagnostics* diag = nullptr);

// The naive covariate-adjusted comparison among the observed other-subtype-free;
// not a causal effect, kept as the comparison baseline.
double conditional_estimand(const OutcomeModelFit& fit, const Dataset& data, int subtype);

}  // namespace sface
