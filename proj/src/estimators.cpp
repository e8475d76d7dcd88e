#include "sface/estimators.hpp"

#include <algorithm>

namespace sface {

Method parse_method(const std::string& token) {
  if (token == "stand") return Method::Standardization;
  if (token == "iptw") return Method::Iptw;
  if (token == "dr") return Method::Dr;
  throw ConfigError("unknown method '" + token + "' (expected stand, iptw, or dr)");
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Standardization: return "stand";
    case Method::Iptw: return "iptw";
    case Method::Dr: return "dr";
  }
  return "?";
}

namespace {

Eigen::VectorXd clipped_propensity(const ExposureModelFit& fit, const Dataset& data,
                                   const EstimatorOptions& opt,
                                   EstimatorDiagnostics* diag) {
  Eigen::VectorXd e = predict_e_all(fit, data);
  Eigen::Index clipped = 0;
  for (Eigen::Index i = 0; i < e.size(); ++i) {
    if (e(i) < opt.clip_low) {
      e(i) = opt.clip_low;
      ++clipped;
    } else if (e(i) > opt.clip_high) {
      e(i) = opt.clip_high;
      ++clipped;
    }
  }
  if (diag) diag->n_clipped = clipped;
  return e;
}

}  // namespace

ComponentSet components_standardization(const OutcomeModelFit& fit, const Dataset& data) {
  if (!fit.converged) throw FitError("components_standardization: outcome fit not converged");
  const Eigen::MatrixX3d pi1 = predict_pi_all(fit, 1, data);
  const Eigen::MatrixX3d pi0 = predict_pi_all(fit, 0, data);
  const Eigen::VectorXd& w = data.weight();
  const double wsum = w.sum();
  ComponentSet c;
  c.p1_1 = w.dot(pi1.col(1)) / wsum;
  c.p2_1 = w.dot(pi1.col(2)) / wsum;
  c.p1_0 = w.dot(pi0.col(1)) / wsum;
  c.p2_0 = w.dot(pi0.col(2)) / wsum;
  return c;
}

ComponentSet components_iptw(const ExposureModelFit& fit, const Dataset& data,
                             const EstimatorOptions& opt, EstimatorDiagnostics* diag) {
  if (!fit.converged) throw FitError("components_iptw: exposure fit not converged");
  if (data.has_unknown_subtype())
    throw DataError("components_iptw: outcome code 9 present; apply missingness "
                    "weighting first");
  const Eigen::VectorXd e = clipped_propensity(fit, data, opt, diag);
  const Eigen::VectorXd& w = data.weight();
  const Eigen::VectorXd& a = data.exposure();
  const double wsum = w.sum();
  ComponentSet c{};
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const int y = data.outcome()(i);
    if (y != kOutcomeSubtype1 && y != kOutcomeSubtype2) continue;
    const double contrib = a(i) == 1.0 ? w(i) / e(i) : w(i) / (1.0 - e(i));
    if (y == kOutcomeSubtype1) {
      (a(i) == 1.0 ? c.p1_1 : c.p1_0) += contrib;
    } else {
      (a(i) == 1.0 ? c.p2_1 : c.p2_0) += contrib;
    }
  }
  c.p1_1 /= wsum;
  c.p1_0 /= wsum;
  c.p2_1 /= wsum;
  c.p2_0 /= wsum;
  return c;
}

ComponentSet components_dr(const OutcomeModelFit& fit_y, const ExposureModelFit& fit_a,
                           const Dataset& data, const EstimatorOptions& opt,
                           EstimatorDiagnostics* diag) {
  if (!fit_y.converged) throw FitError("components_dr: outcome fit not converged");
  if (!fit_a.converged) throw FitError("components_dr: exposure fit not converged");
  if (data.has_unknown_subtype())
    throw DataError("components_dr: outcome code 9 present; apply missingness "
                    "weighting first");
  const Eigen::VectorXd e = clipped_propensity(fit_a, data, opt, diag);
  const Eigen::MatrixX3d pi1 = predict_pi_all(fit_y, 1, data);
  const Eigen::MatrixX3d pi0 = predict_pi_all(fit_y, 0, data);
  const Eigen::VectorXd& w = data.weight();
  const Eigen::VectorXd& a = data.exposure();
  const double wsum = w.sum();

  ComponentSet c{};
  for (int k = 1; k <= 2; ++k) {
    const Eigen::VectorXd yk = data.subtype_indicator(k);
    const auto& pred1 = pi1.col(k);
    const auto& pred0 = opt.dr_a0_literal ? pi1.col(k) : pi0.col(k);
    const double mbar1 = w.dot(pred1) / wsum;
    const double mbar0 = w.dot(pred0) / wsum;
    double acc1 = 0.0, acc0 = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
      const double aug1 =
          opt.dr_augmentation == DrAugmentation::Mean ? mbar1 : pred1(i);
      const double aug0 =
          opt.dr_augmentation == DrAugmentation::Mean ? mbar0 : pred0(i);
      acc1 += w(i) * (a(i) * yk(i) / e(i) - (a(i) - e(i)) * aug1 / e(i));
      acc0 += w(i) * ((1.0 - a(i)) * yk(i) / (1.0 - e(i)) +
                      (a(i) - e(i)) * aug0 / (1.0 - e(i)));
    }
    if (k == 1) {
      c.p1_1 = acc1 / wsum;
      c.p1_0 = acc0 / wsum;
    } else {
      c.p2_1 = acc1 / wsum;
      c.p2_0 = acc0 / wsum;
    }
  }
  return c;
}

double conditional_estimand(const OutcomeModelFit& fit, const Dataset& data, int subtype) {
  if (!fit.converged) throw FitError("conditional_estimand: outcome fit not converged");
  if (subtype != 1 && subtype != 2) throw ConfigError("subtype must be 1 or 2");
  const int other = 3 - subtype;
  const Eigen::MatrixX3d pi1 = predict_pi_all(fit, 1, data);
  const Eigen::MatrixX3d pi0 = predict_pi_all(fit, 0, data);
  const Eigen::VectorXd& w = data.weight();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double d1 = 1.0 - pi1(i, other);
    const double d0 = 1.0 - pi0(i, other);
    if (!(d1 > 0.0) || !(d0 > 0.0))
      throw DataError("conditional_estimand: competing-subtype probability reaches 1");
    acc += w(i) * (pi1(i, subtype) / d1 - pi0(i, subtype) / d0);
  }
  return acc / w.sum();
}

}  // namespace sface
