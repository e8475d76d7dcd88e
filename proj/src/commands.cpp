#include "sface/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "sface/parallel.hpp"

namespace sface {

namespace {

using nlohmann::json;

void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

Dataset load_configured(const RunConfig& cfg, LoadReport* report) {
  require(!cfg.data_path.empty(), "no input data (set --data)");
  require(!cfg.schema.exposure.empty(), "schema: exposure column not set");
  require(!cfg.schema.outcome.empty(), "schema: outcome column not set");
  return load_csv(cfg.data_path, cfg.schema, report);
}

EstimationSpec estimation_spec(const RunConfig& cfg) {
  EstimationSpec est;
  est.methods = cfg.methods;
  est.want_conditional = false;
  for (Method m : cfg.methods)
    if (m == Method::Standardization || m == Method::Dr) est.want_conditional = true;
  if (cfg.missingness)
    est.missingness = MissingnessModelSpec{cfg.schema.aux_covariates, cfg.trunc_quantile};
  est.estimator.dr_augmentation = cfg.dr_augmentation;
  est.estimator.dr_a0_literal = cfg.dr_a0_literal;
  return est;
}

double fixed_axis(const GridAxis& axis, const char* name) {
  if (axis.values.size() != 1)
    throw ConfigError(std::string(name) + ": estimate takes a single value, not a grid");
  return axis.values[0];
}

json effect_to_json(const EffectEstimate& e) {
  json row;
  row["estimand"] = to_string(e.estimand);
  row["scale"] = to_string(e.scale);
  row["method"] = to_string(e.method);
  row["point"] = e.point;
  if (e.scale == Scale::Diff) row["point_per_100k"] = e.point * 1e5;
  row["se"] = e.se;
  row["ci_low"] = e.ci_low;
  row["ci_high"] = e.ci_high;
  row["n_boot"] = e.n_boot;
  if (e.estimand == Estimand::Theta) {
    if (e.se > 0.0) row["p_value"] = theta_test(e.point, e.se);
    else row["p_value"] = nullptr;
  }
  return row;
}

void dump_replicates_csv(const std::string& path, const BootstrapComponents& boot,
                         const CellRequest& req) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open replicate dump '" + path + "'");
  out << "replicate,estimand,scale,method,value\n";
  for (const auto& [key, values] : replicate_values(boot, req)) {
    for (size_t r = 0; r < values.size(); ++r) {
      out << r << ',' << to_string(key.estimand) << ',' << to_string(key.scale) << ','
          << to_string(key.method) << ',';
      if (values[r]) out << format_double(*values[r]);
      out << '\n';
    }
  }
}

}  // namespace

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty() || cfg.out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out);
  if (!out) throw DataError("cannot open output '" + cfg.out + "'");
  out << text;
}

std::string cmd_estimate(const RunConfig& cfg) {
  if (cfg.threads > 0) set_max_threads(cfg.threads);
  LoadReport report;
  const Dataset data = load_configured(cfg, &report);

  const SensitivityParams params{fixed_axis(cfg.lambda1, "lambda1"),
                                 fixed_axis(cfg.lambda2, "lambda2"),
                                 cfg.lambda1_0, cfg.lambda2_0};
  validate_against(params, cfg.combo);

  for (Method m : cfg.methods)
    if (m == Method::Iptw || m == Method::Dr)
      require(!cfg.schema.covariates.empty(),
              "method '" + to_string(m) + "' needs covariates for the propensity model");

  const EstimationSpec est = estimation_spec(cfg);
  BootstrapPlan plan;
  plan.n_reps = cfg.boot;
  plan.seed = cfg.seed;
  plan.refit_missingness = cfg.refit_missingness;

  const BootstrapComponents boot = bootstrap_components(data, est, plan);

  CellRequest req;
  req.combo = cfg.combo;
  req.params = params;
  req.scales = cfg.scales;
  req.methods = cfg.methods;
  req.want_te = true;
  req.want_conditional = est.want_conditional;

  std::vector<int> dropped;
  const std::vector<EffectEstimate> effects = summarize_effects(boot, req, plan, &dropped);

  if (!cfg.dump_replicates.empty()) dump_replicates_csv(cfg.dump_replicates, boot, req);

  json doc;
  doc["command"] = "estimate";
  doc["seed"] = plan.seed;
  doc["n_boot"] = plan.n_reps;
  doc["combo"] = {{"subtype1", to_string(cfg.combo.subtype1)},
                  {"subtype2", to_string(cfg.combo.subtype2)}};
  doc["lambda"] = {{"lambda1", params.lambda1},
                   {"lambda2", params.lambda2},
                   {"lambda1_0", params.lambda1_0},
                   {"lambda2_0", params.lambda2_0}};
  doc["data"] = {{"path", cfg.data_path},
                 {"n", data.n()},
                 {"rows_rejected_missing_covariates", report.n_rejected_missing}};
  if (boot.point.missingness_applied) {
    const MissingnessSummary& ms = boot.point.missingness;
    doc["missingness"] = {{"n_diseased", ms.n_diseased},
                          {"n_unknown_removed", ms.n_unknown_removed},
                          {"truncation_value", ms.truncation_value},
                          {"n_truncated", ms.n_truncated},
                          {"max_weight", ms.max_weight}};
  }
  json models = json::object();
  if (boot.point.outcome_fit)
    models["outcome"] = json::parse(to_json(*boot.point.outcome_fit, data.covariate_names()));
  if (boot.point.exposure_fit)
    models["exposure"] = json::parse(to_json(*boot.point.exposure_fit, data.covariate_names()));
  doc["models"] = models;

  int drop_total = 0;
  for (int d : dropped) drop_total += d;
  doc["diagnostics"] = {{"bootstrap_failed_replicates", boot.n_failed},
                        {"replicate_values_dropped", drop_total},
                        {"propensity_clipped_iptw", boot.point.iptw_diag.n_clipped},
                        {"propensity_clipped_dr", boot.point.dr_diag.n_clipped}};

  json rows = json::array();
  for (const EffectEstimate& e : effects) rows.push_back(effect_to_json(e));
  doc["estimates"] = rows;

  const std::string text = doc.dump(2) + "\n";
  write_output(cfg, text);
  return text;
}

std::string cmd_sensitivity(const RunConfig& cfg) {
  if (cfg.threads > 0) set_max_threads(cfg.threads);
  const Dataset data = load_configured(cfg, nullptr);
  require(cfg.methods.size() == 1, "sensitivity grids take exactly one --method");
  require(cfg.scales.size() == 1, "sensitivity grids take exactly one --scale");

  GridSpec spec;
  spec.lambda1 = cfg.lambda1;
  spec.lambda2 = cfg.lambda2;
  spec.lambda1_0 = cfg.lambda1_0;
  spec.lambda2_0 = cfg.lambda2_0;
  spec.combo = cfg.combo;
  spec.scale = cfg.scales[0];
  spec.method = cfg.methods[0];
  spec.alpha = cfg.alpha;
  spec.clip_to_bounds = cfg.clip_to_bounds;
  spec.estimation = estimation_spec(cfg);
  spec.estimation.methods = {spec.method};

  BootstrapPlan plan;
  plan.n_reps = cfg.boot;
  plan.seed = cfg.seed;
  plan.refit_missingness = cfg.refit_missingness;

  const GridResult result = run_grid(data, spec, plan);
  for (const std::string& note : result.notes) std::cerr << "note: " << note << "\n";

  const std::string text = grid_csv(result);
  write_output(cfg, text);
  if (cfg.boundary) {
    json all = json::array();
    for (Estimand e : {Estimand::SFACE1, Estimand::SFACE2, Estimand::Theta})
      all.push_back(json::parse(boundary_json(result, e)));
    const std::string bpath =
        (cfg.out.empty() || cfg.out == "-") ? "boundary.json" : cfg.out + ".boundary.json";
    std::ofstream bout(bpath);
    if (!bout) throw DataError("cannot open boundary output '" + bpath + "'");
    bout << all.dump(2) << "\n";
  }
  return text;
}

std::string cmd_simulate(const RunConfig& cfg) {
  if (cfg.threads > 0) set_max_threads(cfg.threads);
  StudySpec spec;
  spec.study = cfg.study;
  spec.n = cfg.n;
  spec.n_sims = cfg.sims;
  spec.boot_reps = cfg.boot;
  spec.seed = cfg.seed;
  spec.misspec = cfg.misspec;
  spec.sweep = cfg.sweep;
  spec.n_mc_truth = cfg.n_mc;
  spec.dr_augmentation = cfg.dr_augmentation;

  DGMParams params;
  for (const auto& [path, value] : cfg.dgm_overrides) set_dgm_param(params, path, value);

  const StudyResult result = run_study(spec, params);
  const std::string text = metrics_csv(result, spec);
  write_output(cfg, text);
  return text;
}

std::string cmd_profiles(const RunConfig& cfg) {
  const std::vector<Profile> feasible = feasible_profiles(cfg.combo);
  std::optional<Observation> obs;
  if (!cfg.observed.empty()) {
    const auto parts = split_list(cfg.observed, ',');
    require(parts.size() == 3, "observed must be a,y1,y2");
    obs = Observation{std::stoi(parts[0]), std::stoi(parts[1]), std::stoi(parts[2])};
  }

  std::string text;
  if (cfg.format == OutputFormat::Json) {
    json doc;
    doc["combo"] = {{"subtype1", to_string(cfg.combo.subtype1)},
                    {"subtype2", to_string(cfg.combo.subtype2)}};
    json rows = json::array();
    for (const Profile& p : all_profiles()) {
      bool ok = false;
      for (const Profile& f : feasible) ok = ok || f.id == p.id;
      rows.push_back({{"id", p.id},
                      {"y1_0", p.y1_0},
                      {"y1_1", p.y1_1},
                      {"y2_0", p.y2_0},
                      {"y2_1", p.y2_1},
                      {"feasible", ok}});
    }
    doc["profiles"] = rows;
    if (obs) {
      doc["observed"] = {{"a", obs->a}, {"y1", obs->y1}, {"y2", obs->y2}};
      doc["compatible"] = compatible_profiles(*obs, cfg.combo);
    }
    text = doc.dump(2) + "\n";
  } else {
    std::ostringstream os;
    os << "profiles under (" << to_string(cfg.combo.subtype1) << ", "
       << to_string(cfg.combo.subtype2) << ")\n";
    os << "id  (Y1(0) Y1(1) Y2(0) Y2(1))  feasible\n";
    for (const Profile& p : all_profiles()) {
      bool ok = false;
      for (const Profile& f : feasible) ok = ok || f.id == p.id;
      os << p.id << "   (" << p.y1_0 << "     " << p.y1_1 << "     " << p.y2_0
         << "     " << p.y2_1 << ")      " << (ok ? "yes" : "no") << "\n";
    }
    if (obs) {
      os << "observed (A=" << obs->a << ", Y1=" << obs->y1 << ", Y2=" << obs->y2
         << ") -> compatible profiles:";
      for (int id : compatible_profiles(*obs, cfg.combo)) os << ' ' << id;
      os << "\n";
    }
    text = os.str();
  }
  write_output(cfg, text);
  return text;
}

}  // namespace sface
