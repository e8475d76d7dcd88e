#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sface/inference.hpp"

namespace sface {

// One sensitivity-parameter axis: a single fixed value or an inclusive
// lo:hi:step sweep.
struct GridAxis {
  std::vector<double> values{0.0};
  static GridAxis fixed(double v);
  static GridAxis range(double lo, double hi, double step);
  // "0.3" or "lo:hi:step"
  static GridAxis parse(const std::string& text);
};

struct GridSpec {
  GridAxis lambda1;
  GridAxis lambda2;
  double lambda1_0 = 0.0;
  double lambda2_0 = 0.0;
  AssumptionCombo combo;
  Scale scale = Scale::Diff;
  Method method = Method::Dr;
  double alpha = 0.05;
  bool clip_to_bounds = false;
  EstimationSpec estimation;  // nuisance-model configuration
};

struct GridRow {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  Estimand estimand = Estimand::SFACE1;
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  bool significant = false;
  int n_boot = 0;
};

struct GridResult {
  std::vector<GridRow> rows;  // row-major in (lambda2, lambda1), 3 estimands per cell
  std::vector<double> axis1;  // lambda1 values actually evaluated
  std::vector<double> axis2;
  Scale scale = Scale::Diff;
  Method method = Method::Dr;
  double alpha = 0.05;
  std::vector<std::string> notes;
};

// Fits the nuisance models and runs the bootstrap exactly once; lambda enters
// only the identification layer, evaluated per cell on the cached replicate
// components.
GridResult run_grid(const Dataset& data, const GridSpec& spec, const BootstrapPlan& plan);

struct BoundaryRow {
  double lambda2 = 0.0;
  std::optional<double> lambda1;  // smallest significant lambda1, if any
};

// Per lambda2 row of a rectangular grid, the smallest lambda1 at which the
// estimand is significant.
std::vector<BoundaryRow> significance_boundary(const GridResult& result, Estimand estimand);

// Tidy CSV (one row per cell x estimand) and the boundary as JSON.
std::string grid_csv(const GridResult& result);
std::string boundary_json(const GridResult& result, Estimand estimand);

}  // namespace sface
