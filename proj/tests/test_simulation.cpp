#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "sface/rng.hpp"
#include "sface/simulation.hpp"

using namespace sface;

TEST_CASE("generated populations satisfy subtype monotonicity by construction") {
  const Population pop = simulate_population(DGMParams{}, 200000, 3);
  for (const auto& [y0, y1] : pop.po) {
    if (y0 > 0) CHECK(y1 == y0);  // diseased stays diseased with the same subtype
    CHECK(y0 >= 0);
    CHECK(y1 <= 2);
  }
}

TEST_CASE("a null exposure effect makes the potential outcomes identical") {
  DGMParams g;
  g.beta1 = 0.0;
  g.beta2 = 0.0;
  const Population pop = simulate_population(g, 50000, 5);
  for (const auto& [y0, y1] : pop.po) CHECK(y0 == y1);
}

TEST_CASE("observed outcome follows the consistency rule") {
  const Population pop = simulate_population(DGMParams{}, 20000, 7);
  for (Eigen::Index i = 0; i < pop.data.n(); ++i) {
    const auto& [y0, y1] = pop.po[static_cast<size_t>(i)];
    const int expect = pop.data.exposure()(i) == 1.0 ? y1 : y0;
    CHECK(pop.data.outcome()(i) == expect);
  }
}

TEST_CASE("generated prevalences sit in the study's reported neighbourhood") {
  const TrueEffects t = true_effects(DGMParams{}, 1000000, 11);
  CHECK(t.prev1 > 0.045);
  CHECK(t.prev1 < 0.065);
  CHECK(t.prev2 > 0.010);
  CHECK(t.prev2 < 0.045);
  CHECK(t.prev_exposed > 0.46);
  CHECK(t.prev_exposed < 0.52);
}

TEST_CASE("adjusted second draw recovers the exposed-arm outcome law") {
  // frequency check at a pinned covariate cell
  const DGMParams g;
  const double x1 = 1.0, x2 = 0.7, u = -0.3;
  const auto probs = [&](double a) {
    const double e1 = std::exp(g.alpha1 + g.beta1 * a + g.gamma1[0] * x1 +
                               g.gamma1[1] * x2 + g.delta1 * u);
    const double e2 = std::exp(g.alpha2 + g.beta2 * a + g.gamma2[0] * x1 +
                               g.gamma2[1] * x2 + g.delta2 * u);
    const double den = 1.0 + e1 + e2;
    return std::array<double, 2>{e1 / den, e2 / den};
  };
  const auto p0 = probs(0.0), p1 = probs(1.0);

  RngStream rng(13, 0);
  const int n = 1000000;
  std::array<std::int64_t, 3> c0{}, c1{};
  for (int i = 0; i < n; ++i) {
    const double uy0 = rng.uniform();
    const double uy1 = rng.uniform();
    const int y0 = uy0 < p0[0] ? 1 : (uy0 < p0[0] + p0[1] ? 2 : 0);
    int y1;
    if (y0 > 0) {
      y1 = y0;
    } else {
      const double pfree = 1.0 - p0[0] - p0[1];
      const double q1 = (p1[0] - p0[0]) / pfree;
      const double q2 = (p1[1] - p0[1]) / pfree;
      y1 = uy1 < q1 ? 1 : (uy1 < q1 + q2 ? 2 : 0);
    }
    ++c0[static_cast<size_t>(y0 == 0 ? 0 : y0)];
    ++c1[static_cast<size_t>(y1 == 0 ? 0 : y1)];
  }
  CHECK(std::abs(static_cast<double>(c1[1]) / n - p1[0]) / p1[0] < 0.02);
  CHECK(std::abs(static_cast<double>(c1[2]) / n - p1[1]) / p1[1] < 0.02);
  CHECK(std::abs(static_cast<double>(c0[1]) / n - p0[0]) / p0[0] < 0.02);
}

TEST_CASE("true effects against independently computed quadrature values") {
  // reference values for the baseline parameters from 2-d Gauss-Hermite
  // quadrature over (x2, u) crossed with the binary x1
  const TrueEffects t = true_effects(DGMParams{}, 2000000, 17);
  CHECK(std::abs(t.sface1_d - 0.034721) < 4.0 * t.se_sface1_d);
  CHECK(std::abs(t.sface2_d - 0.009833) < 4.0 * t.se_sface2_d);
  CHECK(t.sface1_rr == doctest::Approx(1.7876).epsilon(0.02));
  CHECK(t.sface2_rr == doctest::Approx(1.8374).epsilon(0.04));
}

TEST_CASE("a null exposure effect gives null true effects") {
  DGMParams g;
  g.beta1 = 0.0;
  g.beta2 = 0.0;
  const TrueEffects t = true_effects(g, 400000, 19);
  CHECK(t.sface1_d == 0.0);
  CHECK(t.sface2_d == 0.0);
  CHECK(t.sface1_rr == 1.0);
  CHECK(t.sface2_rr == 1.0);
}

TEST_CASE("the subtype-free and total risk ratios coincide exactly") {
  const TrueEffects t = true_effects(DGMParams{}, 500000, 23);
  CHECK(t.sface1_rr == t.te1_rr);
  CHECK(t.sface2_rr == t.te2_rr);
}

TEST_CASE("identification formula applied to counted marginals matches the truths") {
  const Population pop = simulate_population(DGMParams{}, 1000000, 29);
  std::int64_t c1_0 = 0, c1_1 = 0, c2_0 = 0, c2_1 = 0;
  for (const auto& [y0, y1] : pop.po) {
    if (y0 == 1) ++c1_0;
    if (y1 == 1) ++c1_1;
    if (y0 == 2) ++c2_0;
    if (y1 == 2) ++c2_1;
  }
  const double n = static_cast<double>(pop.po.size());
  const ComponentSet c{c1_0 / n, c1_1 / n, c2_0 / n, c2_1 / n};

  // definition-based stratum means from the same table
  std::int64_t s1 = 0, s1_y1 = 0, s1_y0 = 0;
  for (const auto& [y0, y1] : pop.po) {
    if (y0 != 2 && y1 != 2) {
      ++s1;
      if (y1 == 1) ++s1_y1;
      if (y0 == 1) ++s1_y0;
    }
  }
  const double direct = (static_cast<double>(s1_y1) - static_cast<double>(s1_y0)) /
                        static_cast<double>(s1);
  const double formula = sface_diff(c, {}, 1);
  CHECK(std::abs(formula - direct) <= 1e-12 * std::max(1.0, std::abs(direct)));
}

TEST_CASE("study II sweep points share covariate and exposure draws") {
  DGMParams a;
  DGMParams b;
  set_dgm_param(b, "gamma2[1]", std::log(6.0));
  const Population pa = simulate_population(a, 5000, 31);
  const Population pb = simulate_population(b, 5000, 31);
  CHECK(pa.data.covariates() == pb.data.covariates());
  CHECK(pa.data.exposure() == pb.data.exposure());
}

TEST_CASE("misspecified generation lowers the subtype-1 truth") {
  const TrueEffects base = true_effects(DGMParams{}, 500000, 37);
  const TrueEffects miss = true_effects(DGMParams{}, 500000, 37, {true, false});
  CHECK(miss.sface1_d < base.sface1_d);
  // the exposure-side transform leaves the potential outcomes untouched
  const TrueEffects expmiss = true_effects(DGMParams{}, 500000, 37, {false, true});
  CHECK(expmiss.sface1_d == base.sface1_d);
}

TEST_CASE("parameter paths") {
  DGMParams g;
  set_dgm_param(g, "beta1", 0.25);
  CHECK(g.beta1 == 0.25);
  set_dgm_param(g, "psi[1]", -0.5);
  CHECK(g.psi[1] == -0.5);
  CHECK_THROWS_AS(set_dgm_param(g, "gamma3[0]", 1.0), ConfigError);
  CHECK_THROWS_AS((void)parse_study("IV"), ConfigError);
  CHECK_THROWS_AS((void)parse_misspec("sideways"), ConfigError);
}

TEST_CASE("misspec outside Study III is refused") {
  StudySpec spec;
  spec.study = Study::I;
  spec.misspec = Misspec::Outcome;
  CHECK_THROWS_AS(run_study(spec, DGMParams{}), ConfigError);
}

TEST_CASE("study metrics agree with an independent aggregation pass") {
  StudySpec spec;
  spec.study = Study::I;
  spec.n = 2500;
  spec.n_sims = 3;
  spec.boot_reps = 12;
  spec.seed = 41;
  spec.n_mc_truth = 300000;
  const StudyResult result = run_study(spec, DGMParams{});
  REQUIRE(!result.rows.empty());
  CHECK(result.n_failed_sims == 0);

  // recompute the sface1/stand/diff row from scratch with the same seeds
  const TrueEffects truth =
      true_effects(DGMParams{}, spec.n_mc_truth, RngStream::mix(spec.seed, 0xAAA));
  EstimationSpec est;
  est.estimator.dr_augmentation = spec.dr_augmentation;
  CellRequest req;
  std::vector<double> points, ses, los, his;
  for (int s = 0; s < spec.n_sims; ++s) {
    const std::uint64_t sim_seed = RngStream::mix(spec.seed, static_cast<std::uint64_t>(s));
    const Population pop =
        simulate_population(DGMParams{}, spec.n, RngStream::mix(sim_seed, 1));
    BootstrapPlan plan{spec.boot_reps, RngStream::mix(sim_seed, 2), false};
    const auto effects =
        summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
    for (const EffectEstimate& e : effects)
      if (e.estimand == Estimand::SFACE1 && e.method == Method::Standardization &&
          e.scale == Scale::Diff) {
        points.push_back(e.point);
        ses.push_back(e.se);
        los.push_back(e.ci_low);
        his.push_back(e.ci_high);
      }
  }
  REQUIRE(points.size() == 3);
  double mean = 0.0;
  for (double p : points) mean += p;
  mean /= 3.0;
  double sd = 0.0, se_mean = 0.0, cp = 0.0;
  for (size_t i = 0; i < 3; ++i) {
    sd += (points[i] - mean) * (points[i] - mean);
    se_mean += ses[i];
    if (los[i] <= truth.sface1_d && truth.sface1_d <= his[i]) cp += 1.0;
  }
  sd = std::sqrt(sd / 2.0);
  se_mean /= 3.0;
  cp /= 3.0;

  for (const MetricsRow& row : result.rows) {
    if (row.estimand == Estimand::SFACE1 && row.method == Method::Standardization &&
        row.scale == Scale::Diff) {
      CHECK(row.truth == truth.sface1_d);
      CHECK(row.bias == doctest::Approx(mean - truth.sface1_d).epsilon(1e-12));
      CHECK(row.pct_bias ==
            doctest::Approx(100.0 * (mean - truth.sface1_d) / truth.sface1_d).epsilon(1e-12));
      CHECK(row.emp_sd == doctest::Approx(sd).epsilon(1e-12));
      CHECK(row.mean_est_se == doctest::Approx(se_mean).epsilon(1e-12));
      CHECK(row.cp95 == doctest::Approx(cp).epsilon(1e-12));
      CHECK(row.n_sims == 3);
    }
  }
}

TEST_CASE("study result carries the expected estimand rows") {
  StudySpec spec;
  spec.study = Study::I;
  spec.n = 2000;
  spec.n_sims = 2;
  spec.boot_reps = 0;  // bias-only run
  spec.seed = 43;
  spec.n_mc_truth = 200000;
  const StudyResult result = run_study(spec, DGMParams{});
  // 2 scales x 3 methods x (sface1, sface2, theta) + 2 scales x (te1, te2)
  // + the two difference-scale conditional baselines
  CHECK(result.rows.size() == 24);
  for (const MetricsRow& row : result.rows) CHECK(std::isnan(row.cp95));
  const std::string csv = metrics_csv(result, spec);
  CHECK(csv.find("study,misspec,") == 0);
}
