#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sface/csv.hpp"
#include "sface/inference.hpp"
#include "sface/simulation.hpp"

using namespace sface;

TEST_CASE("normal cdf and quantile") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-6));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(normal_cdf(normal_quantile(0.3)) == doctest::Approx(0.3).epsilon(1e-9));
  CHECK_THROWS_AS(normal_quantile(0.0), ConfigError);
}

TEST_CASE("theta test") {
  CHECK(theta_test(0.0, 1.0) == 1.0);
  CHECK(theta_test(1.96, 1.0) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(theta_test(1.0, 0.5) == doctest::Approx(0.0455).epsilon(1e-3));
  CHECK(theta_test(1.0, 0.5) == doctest::Approx(2.0 * (1.0 - normal_cdf(2.0))).epsilon(1e-12));
  CHECK_THROWS_AS(theta_test(1.0, 0.0), DataError);
}

TEST_CASE("published Wald interval arithmetic") {
  const double point = 161.3, se = 77.9;
  const double lo = point - kZ975 * se;
  const double hi = point + kZ975 * se;
  CHECK(std::round(lo * 10.0) / 10.0 == 8.6);
  CHECK(std::round(hi * 10.0) / 10.0 == 314.0);
}

TEST_CASE("a constant pipeline gives zero se and a collapsed interval") {
  BootstrapComponents boot;
  FittedComponents fc;
  fc.components[Method::Standardization] = ComponentSet{0.03, 0.05, 0.01, 0.02};
  boot.point = fc;
  boot.replicates.assign(20, fc);
  CellRequest req;
  req.methods = {Method::Standardization};
  req.scales = {Scale::Diff};
  req.want_te = false;
  req.want_conditional = false;
  BootstrapPlan plan;
  plan.n_reps = 20;
  const auto effects = summarize_effects(boot, req, plan);
  REQUIRE(effects.size() == 3);
  for (const EffectEstimate& e : effects) {
    CHECK(e.se == 0.0);
    CHECK(e.ci_low == e.point);
    CHECK(e.ci_high == e.point);
  }
}

TEST_CASE("bootstrap: point estimate is seed-free, the se is not") {
  const Population pop = simulate_population(DGMParams{}, 3000, 77);
  EstimationSpec est;
  est.methods = {Method::Standardization};
  est.want_conditional = false;
  CellRequest req;
  req.methods = est.methods;
  req.scales = {Scale::Diff};
  req.want_te = false;
  req.want_conditional = false;

  BootstrapPlan p1{30, 1, true};
  BootstrapPlan p2{30, 2, true};
  const auto e1 = summarize_effects(bootstrap_components(pop.data, est, p1), req, p1);
  const auto e2 = summarize_effects(bootstrap_components(pop.data, est, p2), req, p2);
  REQUIRE(e1.size() == e2.size());
  CHECK(e1[0].point == e2[0].point);
  CHECK(e1[0].se != e2[0].se);
  CHECK(e1[0].ci_low <= e1[0].point);
  CHECK(e1[0].point <= e1[0].ci_high);
}

TEST_CASE("bootstrap is reproducible for a fixed seed") {
  const Population pop = simulate_population(DGMParams{}, 2000, 78);
  EstimationSpec est;
  BootstrapPlan plan{40, 9, true};
  CellRequest req;
  const auto e1 = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
  const auto e2 = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
  REQUIRE(e1.size() == e2.size());
  for (size_t i = 0; i < e1.size(); ++i) {
    CHECK(e1[i].point == e2[i].point);
    CHECK(e1[i].se == e2[i].se);
  }
}

TEST_CASE("failed replicates beyond the cap abort with diagnostics") {
  // a single interior subtype-2 case: many resamples lose the category
  Eigen::VectorXd a(12), w = Eigen::VectorXd::Ones(12);
  Eigen::MatrixXd x(12, 1);
  Eigen::VectorXi y(12);
  for (int i = 0; i < 12; ++i) {
    a(i) = (i / 2) % 2;
    x(i, 0) = 0.1 * (i + 1);
    y(i) = i % 2;  // alternate healthy and subtype 1
  }
  y(5) = 2;
  const Dataset d = Dataset::create(a, x, y, w, {"x1"});
  EstimationSpec est;
  est.methods = {Method::Standardization};
  est.want_conditional = false;
  BootstrapPlan plan{60, 3, true};
  CHECK_THROWS_WITH_AS(bootstrap_components(d, est, plan),
                       doctest::Contains("replicates failed"), FitError);
}

TEST_CASE("missingness refit toggle changes the uncertainty, not the point") {
  const char* data_dir = std::getenv("SFACE_DATA_DIR");
  const std::string dir = data_dir ? data_dir : "data";
  const CsvSchema schema{"smoke", "y", {"x1", "x2"}, "", {"severity"}};
  const Dataset d = load_csv(dir + "/fixture_missing_n400.csv", schema);

  EstimationSpec est;
  est.methods = {Method::Standardization};
  est.want_conditional = false;
  est.missingness = MissingnessModelSpec{{"severity"}, 0.99};
  CellRequest req;
  req.methods = est.methods;
  req.scales = {Scale::Diff};
  req.want_te = false;
  req.want_conditional = false;

  BootstrapPlan refit{50, 4, true};
  BootstrapPlan frozen{50, 4, false};
  const auto e1 = summarize_effects(bootstrap_components(d, est, refit), req, refit);
  const auto e2 = summarize_effects(bootstrap_components(d, est, frozen), req, frozen);
  REQUIRE(!e1.empty());
  REQUIRE(!e2.empty());
  CHECK(e1[0].point == e2[0].point);  // the original-data estimate is shared
  CHECK(e1[0].se != e2[0].se);
}

TEST_CASE("evaluate_cell reports unavailable values instead of failing the cell") {
  FittedComponents fc;
  fc.components[Method::Standardization] = ComponentSet{0.05, 0.08, 0.30, 0.75};
  CellRequest req;
  req.combo = {Mono::DMono, Mono::DMono};
  req.params = {0.0, 1.0, 0.0, 0.0};  // lambda2 large enough to break subtype 1
  req.methods = {Method::Standardization};
  req.scales = {Scale::Diff};
  req.want_te = false;
  req.want_conditional = false;
  std::vector<std::string> notes;
  const auto rows = evaluate_cell(fc, req, &notes);
  REQUIRE(rows.size() == 3);
  CHECK(!rows[0].second.has_value());  // sface1 denominators fail
  CHECK(rows[1].second.has_value());   // sface2 is fine
  CHECK(!rows[2].second.has_value());  // theta needs both
  CHECK(!notes.empty());
}

TEST_CASE("replicate dumps align with the summarized statistics") {
  const Population pop = simulate_population(DGMParams{}, 1500, 80);
  EstimationSpec est;
  est.methods = {Method::Standardization};
  est.want_conditional = false;
  BootstrapPlan plan{25, 11, true};
  const BootstrapComponents boot = bootstrap_components(pop.data, est, plan);
  CellRequest req;
  req.methods = est.methods;
  req.scales = {Scale::Diff};
  req.want_te = false;
  req.want_conditional = false;
  const auto effects = summarize_effects(boot, req, plan);
  const auto values = replicate_values(boot, req);
  REQUIRE(values.size() == 3);

  // independent aggregation of the dumped replicate values
  double sum = 0.0;
  int used = 0;
  for (const auto& v : values[0].second)
    if (v) {
      sum += *v;
      ++used;
    }
  const double mean = sum / used;
  double ss = 0.0;
  for (const auto& v : values[0].second)
    if (v) ss += (*v - mean) * (*v - mean);
  CHECK(effects[0].se == doctest::Approx(std::sqrt(ss / (used - 1))).epsilon(1e-14));
  CHECK(effects[0].n_boot == used);
}
