#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <optional>

#include "sface/parallel.hpp"
#include "sface/sensitivity.hpp"
#include "sface/simulation.hpp"

using namespace sface;

// The parallel kernels must reproduce the serial reference bitwise for any
// worker count: work items own their output slots and streams are spawned by
// index, never shared.

namespace {

struct ThreadGuard {
  int saved;
  explicit ThreadGuard(int n) : saved(max_threads()) { set_max_threads(n); }
  ~ThreadGuard() { set_max_threads(saved); }
};

}  // namespace

TEST_CASE("parallel_for covers every index exactly once") {
  std::vector<int> hits(1000, 0);
  parallel_for(1000, [&](std::int64_t i) { hits[static_cast<size_t>(i)] += 1; });
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("true_effects is thread-count invariant") {
  TrueEffects serial, parallel;
  {
    ThreadGuard guard(1);
    serial = true_effects(DGMParams{}, 300000, 7);
  }
  {
    ThreadGuard guard(4);
    parallel = true_effects(DGMParams{}, 300000, 7);
  }
  CHECK(std::memcmp(&serial, &parallel, sizeof(TrueEffects)) == 0);
}

TEST_CASE("simulate_population is thread-count invariant") {
  std::optional<Population> serial, parallel;
  {
    ThreadGuard guard(1);
    serial = simulate_population(DGMParams{}, 150000, 11);
  }
  {
    ThreadGuard guard(4);
    parallel = simulate_population(DGMParams{}, 150000, 11);
  }
  CHECK(serial->data.exposure() == parallel->data.exposure());
  CHECK(serial->data.covariates() == parallel->data.covariates());
  CHECK(serial->data.outcome() == parallel->data.outcome());
  CHECK(serial->po == parallel->po);
}

TEST_CASE("bootstrap inference is thread-count invariant") {
  const Population pop = simulate_population(DGMParams{}, 4000, 13);
  EstimationSpec est;
  BootstrapPlan plan{60, 17, true};
  CellRequest req;

  std::vector<EffectEstimate> serial, parallel;
  {
    ThreadGuard guard(1);
    serial = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
  }
  {
    ThreadGuard guard(4);
    parallel = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
  }
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].point == parallel[i].point);
    CHECK(serial[i].se == parallel[i].se);
    CHECK(serial[i].ci_low == parallel[i].ci_low);
    CHECK(serial[i].ci_high == parallel[i].ci_high);
    CHECK(serial[i].n_boot == parallel[i].n_boot);
  }
}

TEST_CASE("study metrics are thread-count invariant") {
  StudySpec spec;
  spec.study = Study::I;
  spec.n = 1500;
  spec.n_sims = 4;
  spec.boot_reps = 10;
  spec.seed = 19;
  spec.n_mc_truth = 100000;

  std::vector<MetricsRow> serial, parallel;
  {
    ThreadGuard guard(1);
    serial = run_study(spec, DGMParams{}).rows;
  }
  {
    ThreadGuard guard(4);
    parallel = run_study(spec, DGMParams{}).rows;
  }
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].bias == parallel[i].bias);
    CHECK(serial[i].emp_sd == parallel[i].emp_sd);
    CHECK(serial[i].cp95 == parallel[i].cp95);
    CHECK(serial[i].mean_est_se == parallel[i].mean_est_se);
  }
}

TEST_CASE("grid evaluation is thread-count invariant") {
  DGMParams g;
  g.alpha1 = std::log(0.15);
  g.alpha2 = std::log(0.08);
  const Dataset d = simulate_population(g, 2500, 23).data;
  GridSpec spec;
  spec.combo = {Mono::DMono, Mono::DMono};
  spec.lambda1 = GridAxis::range(0.0, 0.1, 0.05);
  spec.lambda2 = GridAxis::range(0.0, 0.05, 0.05);
  spec.method = Method::Standardization;
  spec.estimation.methods = {Method::Standardization};
  spec.estimation.want_conditional = false;
  BootstrapPlan plan{20, 29, true};

  std::string serial, parallel;
  {
    ThreadGuard guard(1);
    serial = grid_csv(run_grid(d, spec, plan));
  }
  {
    ThreadGuard guard(4);
    parallel = grid_csv(run_grid(d, spec, plan));
  }
  CHECK(serial == parallel);
}
