#include "sface/inference.hpp"

#include <algorithm>
#include <cmath>

#include "sface/parallel.hpp"
#include "sface/rng.hpp"

namespace sface {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  // Wichura's AS241 rational approximations
  if (!(p > 0.0) || !(p < 1.0)) throw ConfigError("normal_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2509.0809287301226727 * r + 33430.575583588128105) * r +
                 67265.770927008700853) * r + 45921.953931549871457) * r +
               13731.693765509461125) * r + 1971.5909503065514427) * r +
             133.14166789178437745) * r + 3.387132872796366608) /
           (((((((5226.495278852545703 * r + 28729.085735721942674) * r +
                 39307.89580009271061) * r + 21213.794301586595867) * r +
               5394.1960214247511077) * r + 687.1870074920579083) * r +
             42.313330701600911252) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.7454501427834140764e-4 * r + 0.0227238449892691845833) * r +
                0.24178072517745061177) * r + 1.27045825245236838258) * r +
              3.64784832476320460504) * r + 5.7694972214606914055) * r +
            4.6303378461565452959) * r + 1.42343711074968357734) /
          (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                0.0151986665636164571966) * r + 0.14810397642748007459) * r +
              0.68976733498510000455) * r + 1.6763848301838038494) * r +
            2.05319162663775882187) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                0.0012426609473880784386) * r + 0.026532189526576123093) * r +
              0.29656057182850489123) * r + 1.7848265399172913358) * r +
            5.4637849111641143699) * r + 6.6579046435011037772) /
          (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
              0.0148753612908506148525) * r + 0.13692988092273580531) * r +
            0.59983220655588793769) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double theta_test(double theta_hat, double se) {
  if (!(se > 0.0)) throw DataError("theta_test: se must be positive");
  const double z = std::abs(theta_hat / se);
  return std::erfc(z / std::sqrt(2.0));
}

std::string to_string(Estimand e) {
  switch (e) {
    case Estimand::SFACE1: return "sface1";
    case Estimand::SFACE2: return "sface2";
    case Estimand::Theta: return "theta";
    case Estimand::TE1: return "te1";
    case Estimand::TE2: return "te2";
    case Estimand::Conditional1: return "cond1";
    case Estimand::Conditional2: return "cond2";
  }
  return "?";
}

namespace {
bool needs_outcome(const EstimationSpec& spec) {
  if (spec.want_conditional) return true;
  for (Method m : spec.methods)
    if (m == Method::Standardization || m == Method::Dr) return true;
  return false;
}

bool needs_exposure(const EstimationSpec& spec) {
  for (Method m : spec.methods)
    if (m == Method::Iptw || m == Method::Dr) return true;
  return false;
}
}  // namespace

FittedComponents run_pipeline(const Dataset& data, const EstimationSpec& spec,
                              bool apply_missingness, const FittedComponents* warm) {
  FittedComponents fc;
  const Dataset* work = &data;
  std::optional<Dataset> weighted;
  if (spec.missingness && apply_missingness) {
    weighted = missingness_weights(data, *spec.missingness, &fc.missingness);
    fc.missingness_applied = true;
    work = &*weighted;
  }

  if (needs_outcome(spec)) {
    const Eigen::MatrixXd* ws =
        (warm && warm->outcome_fit) ? &warm->outcome_fit->coef : nullptr;
    fc.outcome_fit = fit_multinomial(*work, spec.fit, ws);
  }
  if (needs_exposure(spec)) {
    const Eigen::VectorXd* ws =
        (warm && warm->exposure_fit) ? &warm->exposure_fit->coef : nullptr;
    fc.exposure_fit = fit_logistic(*work, spec.fit, ws);
  }

  for (Method m : spec.methods) {
    switch (m) {
      case Method::Standardization:
        fc.components[m] = components_standardization(*fc.outcome_fit, *work);
        break;
      case Method::Iptw:
        fc.components[m] =
            components_iptw(*fc.exposure_fit, *work, spec.estimator, &fc.iptw_diag);
        break;
      case Method::Dr:
        fc.components[m] = components_dr(*fc.outcome_fit, *fc.exposure_fit, *work,
                                         spec.estimator, &fc.dr_diag);
        break;
    }
  }
  if (spec.want_conditional && fc.outcome_fit) {
    fc.cond1 = conditional_estimand(*fc.outcome_fit, *work, 1);
    fc.cond2 = conditional_estimand(*fc.outcome_fit, *work, 2);
  }
  return fc;
}

BootstrapComponents bootstrap_components(const Dataset& data, const EstimationSpec& spec,
                                         const BootstrapPlan& plan,
                                         double max_failure_fraction) {
  if (plan.n_reps < 2) throw ConfigError("bootstrap: n_reps must be at least 2");
  if (data.n() < 2) throw DataError("bootstrap: need at least 2 rows");

  BootstrapComponents out;
  out.point = run_pipeline(data, spec, true);

  // when the missingness model is frozen, resample the weighted dataset
  const bool refit = plan.refit_missingness || !spec.missingness;
  std::optional<Dataset> weighted;
  const Dataset* source = &data;
  if (!refit) {
    weighted = missingness_weights(data, *spec.missingness);
    source = &*weighted;
  }

  const Eigen::Index n = source->n();
  out.replicates.assign(static_cast<size_t>(plan.n_reps), std::nullopt);
  std::vector<std::string> notes(static_cast<size_t>(plan.n_reps));

  parallel_for(plan.n_reps, [&](std::int64_t r) {
    RngStream rng(plan.seed, static_cast<std::uint64_t>(r));
    std::vector<Eigen::Index> idx(static_cast<size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      idx[static_cast<size_t>(i)] =
          static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)));
    const Dataset resampled = source->resample(idx);
    try {
      out.replicates[static_cast<size_t>(r)] =
          run_pipeline(resampled, spec, refit, &out.point);
    } catch (const std::exception& ex) {
      notes[static_cast<size_t>(r)] = ex.what();
    }
  });

  for (size_t r = 0; r < out.replicates.size(); ++r) {
    if (!out.replicates[r]) {
      ++out.n_failed;
      out.failure_notes.push_back("replicate " + std::to_string(r) + ": " + notes[r]);
    }
  }
  if (out.n_failed > max_failure_fraction * plan.n_reps) {
    std::string msg = "bootstrap: " + std::to_string(out.n_failed) + " of " +
                      std::to_string(plan.n_reps) + " replicates failed";
    for (size_t i = 0; i < out.failure_notes.size() && i < 5; ++i)
      msg += "\n  " + out.failure_notes[i];
    throw FitError(msg);
  }
  return out;
}

std::vector<std::pair<EstimandKey, std::optional<double>>> evaluate_cell(
    const FittedComponents& fc, const CellRequest& req, std::vector<std::string>* notes) {
  validate_against(req.params, req.combo);
  std::vector<std::pair<EstimandKey, std::optional<double>>> out;
  const auto push = [&](Estimand e, Scale s, Method m, std::optional<double> v) {
    out.emplace_back(EstimandKey{e, s, m}, v);
  };

  for (Method m : req.methods) {
    const auto it = fc.components.find(m);
    if (it == fc.components.end())
      throw ConfigError("evaluate_cell: components for method '" + to_string(m) +
                        "' were not computed");
    const ComponentSet& c = it->second;
    validate_components(c);
    for (Scale s : req.scales) {
      std::optional<double> s1, s2, th;
      try {
        s1 = sface(c, req.params, 1, s);
      } catch (const std::exception& ex) {
        if (notes) notes->push_back(std::string(ex.what()));
      }
      try {
        s2 = sface(c, req.params, 2, s);
      } catch (const std::exception& ex) {
        if (notes) notes->push_back(std::string(ex.what()));
      }
      if (s1 && s2) th = theta(*s1, *s2);
      push(Estimand::SFACE1, s, m, s1);
      push(Estimand::SFACE2, s, m, s2);
      push(Estimand::Theta, s, m, th);
      if (req.want_te) {
        std::optional<double> t1, t2;
        try {
          t1 = te(c, 1, s);
          t2 = te(c, 2, s);
        } catch (const std::exception& ex) {
          if (notes) notes->push_back(std::string(ex.what()));
        }
        push(Estimand::TE1, s, m, t1);
        push(Estimand::TE2, s, m, t2);
      }
    }
  }
  if (req.want_conditional && fc.cond1) {
    push(Estimand::Conditional1, Scale::Diff, Method::Standardization, fc.cond1);
    push(Estimand::Conditional2, Scale::Diff, Method::Standardization, fc.cond2);
  }
  return out;
}

std::vector<std::pair<EstimandKey, std::vector<std::optional<double>>>>
replicate_values(const BootstrapComponents& boot, const CellRequest& req) {
  const auto point_rows = evaluate_cell(boot.point, req);
  std::vector<std::pair<EstimandKey, std::vector<std::optional<double>>>> out;
  out.reserve(point_rows.size());
  for (const auto& row : point_rows)
    out.emplace_back(row.first,
                     std::vector<std::optional<double>>(boot.replicates.size()));
  for (size_t r = 0; r < boot.replicates.size(); ++r) {
    if (!boot.replicates[r]) continue;
    try {
      const auto rows = evaluate_cell(*boot.replicates[r], req);
      for (size_t k = 0; k < rows.size(); ++k) out[k].second[r] = rows[k].second;
    } catch (const DataError&) {
      // replicate components breached the validation slack: drop the replicate
    }
  }
  return out;
}

std::vector<EffectEstimate> summarize_effects(const BootstrapComponents& boot,
                                              const CellRequest& req,
                                              const BootstrapPlan& plan,
                                              std::vector<int>* dropped) {
  const auto point_rows = evaluate_cell(boot.point, req);
  const auto reps = replicate_values(boot, req);
  std::vector<EffectEstimate> out;
  if (dropped) dropped->assign(point_rows.size(), 0);

  for (size_t k = 0; k < point_rows.size(); ++k) {
    if (!point_rows[k].second) {
      // the point estimate itself is unavailable under these lambdas
      if (dropped) (*dropped)[k] = static_cast<int>(boot.replicates.size());
      continue;
    }
    EffectEstimate e;
    e.estimand = point_rows[k].first.estimand;
    e.scale = point_rows[k].first.scale;
    e.method = point_rows[k].first.method;
    e.point = *point_rows[k].second;
    e.seed = plan.seed;

    double sum = 0.0;
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    int used = 0;
    for (const auto& v : reps[k].second)
      if (v) {
        sum += *v;
        vmin = std::min(vmin, *v);
        vmax = std::max(vmax, *v);
        ++used;
      }
    if (dropped)
      (*dropped)[k] = static_cast<int>(boot.replicates.size()) - used - boot.n_failed;
    if (used >= 2 && vmin != vmax) {
      const double mean = sum / used;
      double ss = 0.0;
      for (const auto& v : reps[k].second)
        if (v) ss += (*v - mean) * (*v - mean);
      e.se = std::sqrt(ss / (used - 1));
    } else {
      e.se = 0.0;  // a degenerate replicate distribution has no spread
    }
    e.n_boot = used;
    e.ci_low = e.point - kZ975 * e.se;
    e.ci_high = e.point + kZ975 * e.se;
    out.push_back(e);
  }
  return out;
}

}  // namespace sface
