#include "sface/sensitivity.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "sface/csv.hpp"
#include "sface/parallel.hpp"

namespace sface {

GridAxis GridAxis::fixed(double v) { return GridAxis{{v}}; }

GridAxis GridAxis::range(double lo, double hi, double step) {
  if (!(step > 0.0)) throw ConfigError("grid axis: step must be positive");
  if (hi < lo) throw ConfigError("grid axis: hi must be >= lo");
  GridAxis axis;
  axis.values.clear();
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < count; ++i) axis.values.push_back(lo + i * step);
  return axis;
}

GridAxis GridAxis::parse(const std::string& text) {
  const auto c1 = text.find(':');
  if (c1 == std::string::npos) return fixed(std::stod(text));
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw ConfigError("grid axis '" + text + "': expected value or lo:hi:step");
  return range(std::stod(text.substr(0, c1)), std::stod(text.substr(c1 + 1, c2 - c1 - 1)),
               std::stod(text.substr(c2 + 1)));
}

GridResult run_grid(const Dataset& data, const GridSpec& spec, const BootstrapPlan& plan) {
  for (double v : spec.lambda1.values)
    if (v < 0.0 || v > 1.0) throw ConfigError("lambda1 grid leaves [0,1]");
  for (double v : spec.lambda2.values)
    if (v < 0.0 || v > 1.0) throw ConfigError("lambda2 grid leaves [0,1]");

  EstimationSpec est = spec.estimation;
  est.methods = {spec.method};
  est.want_conditional = false;

  // every cell must satisfy the combo's structural zero-constraints
  for (double l1 : spec.lambda1.values)
    for (double l2 : spec.lambda2.values)
      validate_against({l1, l2, spec.lambda1_0, spec.lambda2_0}, spec.combo);

  GridResult result;
  result.scale = spec.scale;
  result.method = spec.method;
  result.alpha = spec.alpha;

  const BootstrapComponents boot = bootstrap_components(data, est, plan);

  result.axis1 = spec.lambda1.values;
  result.axis2 = spec.lambda2.values;
  if (spec.clip_to_bounds) {
    const auto [l1max, l2max] = lambda_bounds(boot.point.components.at(spec.method));
    std::vector<double> a1, a2;
    for (double v : result.axis1)
      if (v <= l1max) a1.push_back(v);
    for (double v : result.axis2)
      if (v <= l2max) a2.push_back(v);
    if (a1.size() < result.axis1.size() || a2.size() < result.axis2.size())
      result.notes.push_back(
          "grid truncated to data-driven bounds (lambda1_max=" + format_double(l1max) +
          ", lambda2_max=" + format_double(l2max) + ")");
    if (a1.empty() || a2.empty()) throw ConfigError("run_grid: no cells inside lambda bounds");
    result.axis1 = a1;
    result.axis2 = a2;
  }

  const double zsig =
      spec.alpha == 0.05 ? kZ975 : normal_quantile(1.0 - spec.alpha / 2.0);
  const double null_value = spec.scale == Scale::Diff ? 0.0 : 1.0;

  const std::int64_t n_cells =
      static_cast<std::int64_t>(result.axis1.size()) * static_cast<std::int64_t>(result.axis2.size());
  result.rows.assign(static_cast<size_t>(3 * n_cells), GridRow{});
  std::vector<std::string> cell_notes(static_cast<size_t>(n_cells));

  parallel_for(n_cells, [&](std::int64_t cell) {
    const size_t i2 = static_cast<size_t>(cell) / result.axis1.size();
    const size_t i1 = static_cast<size_t>(cell) % result.axis1.size();
    const double l1 = result.axis1[i1];
    const double l2 = result.axis2[i2];
    CellRequest req;
    req.combo = spec.combo;
    req.params = {l1, l2, spec.lambda1_0, spec.lambda2_0};
    req.scales = {spec.scale};
    req.methods = {spec.method};
    req.want_te = false;
    req.want_conditional = false;

    std::vector<int> dropped;
    const auto effects = summarize_effects(boot, req, plan, &dropped);
    int drop_total = 0;
    for (int d : dropped) drop_total += d;
    if (drop_total > 0)
      cell_notes[static_cast<size_t>(cell)] =
          "cell (lambda1=" + format_double(l1) + ", lambda2=" + format_double(l2) +
          "): " + std::to_string(drop_total) + " replicate values dropped";

    // evaluate_cell emits SFACE1, SFACE2, Theta in order for the single
    // method/scale; a missing point estimate leaves a gap we must keep stable
    size_t slot = 0;
    for (const Estimand e : {Estimand::SFACE1, Estimand::SFACE2, Estimand::Theta}) {
      GridRow row;
      row.lambda1 = l1;
      row.lambda2 = l2;
      row.estimand = e;
      bool found = false;
      for (const auto& eff : effects) {
        if (eff.estimand == e) {
          row.point = eff.point;
          row.se = eff.se;
          row.ci_low = eff.ci_low;
          row.ci_high = eff.ci_high;
          row.n_boot = eff.n_boot;
          row.significant =
              eff.se > 0.0 ? std::abs(eff.point - null_value) > zsig * eff.se
                           : eff.point != null_value;
          found = true;
          break;
        }
      }
      if (!found) {
        row.point = std::nan("");
        row.se = std::nan("");
        row.ci_low = std::nan("");
        row.ci_high = std::nan("");
        row.n_boot = 0;
        row.significant = false;
        cell_notes[static_cast<size_t>(cell)] +=
            std::string(cell_notes[static_cast<size_t>(cell)].empty() ? "" : "; ") +
            "cell (lambda1=" + format_double(l1) + ", lambda2=" + format_double(l2) +
            "): point estimate unavailable for " + to_string(e);
      }
      result.rows[static_cast<size_t>(3 * cell) + slot] = row;
      ++slot;
    }
  });

  for (const auto& note : cell_notes)
    if (!note.empty()) result.notes.push_back(note);
  return result;
}

std::vector<BoundaryRow> significance_boundary(const GridResult& result, Estimand estimand) {
  std::vector<BoundaryRow> out;
  for (size_t i2 = 0; i2 < result.axis2.size(); ++i2) {
    BoundaryRow row;
    row.lambda2 = result.axis2[i2];
    for (size_t i1 = 0; i1 < result.axis1.size(); ++i1) {
      const size_t cell = i2 * result.axis1.size() + i1;
      for (size_t k = 0; k < 3; ++k) {
        const GridRow& r = result.rows[3 * cell + k];
        if (r.estimand == estimand && r.significant) {
          row.lambda1 = r.lambda1;
          break;
        }
      }
      if (row.lambda1) break;
    }
    out.push_back(row);
  }
  return out;
}

std::string grid_csv(const GridResult& result) {
  std::ostringstream os;
  os << "lambda1,lambda2,estimand,scale,method,point,se,ci_low,ci_high,significant,n_boot\n";
  for (const GridRow& r : result.rows) {
    os << format_double(r.lambda1) << ',' << format_double(r.lambda2) << ','
       << to_string(r.estimand) << ',' << to_string(result.scale) << ','
       << to_string(result.method) << ',' << format_double(r.point) << ','
       << format_double(r.se) << ',' << format_double(r.ci_low) << ','
       << format_double(r.ci_high) << ',' << (r.significant ? 1 : 0) << ','
       << r.n_boot << '\n';
  }
  return os.str();
}

std::string boundary_json(const GridResult& result, Estimand estimand) {
  nlohmann::json j;
  j["estimand"] = to_string(estimand);
  j["alpha"] = result.alpha;
  j["scale"] = to_string(result.scale);
  nlohmann::json rows = nlohmann::json::array();
  for (const BoundaryRow& r : significance_boundary(result, estimand)) {
    nlohmann::json row;
    row["lambda2"] = r.lambda2;
    if (r.lambda1) row["lambda1"] = *r.lambda1;
    else row["lambda1"] = nullptr;
    rows.push_back(row);
  }
  j["boundary"] = rows;
  return j.dump(2) + "\n";
}

}  // namespace sface
