#include <chrono>
#include <cstdio>
#include <cstring>
#include <optional>

#include "sface/parallel.hpp"
#include "sface/simulation.hpp"

// Times the OpenMP work loops against their serial reference and checks the
// outputs are bitwise identical (the library's determinism contract).

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double timed(F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return seconds_since(t0);
}

bool same_truths(const sface::TrueEffects& a, const sface::TrueEffects& b) {
  return std::memcmp(&a, &b, sizeof(a)) == 0;
}

}  // namespace

int main() {
  using namespace sface;
  const DGMParams params;
  const int hw_threads = max_threads();

  std::printf("kernel                         serial      parallel(x%d)  speedup  identical\n",
              hw_threads);

  {
    TrueEffects serial_out, parallel_out;
    set_max_threads(1);
    const double ts = timed([&] { serial_out = true_effects(params, 2000000, 7); });
    set_max_threads(hw_threads);
    const double tp = timed([&] { parallel_out = true_effects(params, 2000000, 7); });
    std::printf("true_effects n=2e6             %8.3fs  %8.3fs     %5.2fx  %s\n", ts, tp,
                ts / tp, same_truths(serial_out, parallel_out) ? "yes" : "NO");
  }

  {
    set_max_threads(1);
    std::optional<Population> pa, pb;
    const double ts = timed([&] { pa = simulate_population(params, 1000000, 17); });
    set_max_threads(hw_threads);
    const double tp = timed([&] { pb = simulate_population(params, 1000000, 17); });
    const bool same = pa->data.outcome() == pb->data.outcome() &&
                      pa->data.covariates() == pb->data.covariates() &&
                      pa->data.exposure() == pb->data.exposure() && pa->po == pb->po;
    std::printf("simulate_population n=1e6      %8.3fs  %8.3fs     %5.2fx  %s\n", ts, tp,
                ts / tp, same ? "yes" : "NO");
  }

  {
    const Population pop = simulate_population(params, 20000, 23);
    EstimationSpec est;
    BootstrapPlan plan;
    plan.n_reps = 100;
    plan.seed = 5;
    CellRequest req;
    std::vector<EffectEstimate> ea, eb;
    set_max_threads(1);
    const double ts = timed([&] {
      ea = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
    });
    set_max_threads(hw_threads);
    const double tp = timed([&] {
      eb = summarize_effects(bootstrap_components(pop.data, est, plan), req, plan);
    });
    bool same = ea.size() == eb.size();
    for (size_t i = 0; same && i < ea.size(); ++i)
      same = ea[i].point == eb[i].point && ea[i].se == eb[i].se &&
             ea[i].ci_low == eb[i].ci_low && ea[i].ci_high == eb[i].ci_high;
    std::printf("bootstrap n=2e4, 100 reps      %8.3fs  %8.3fs     %5.2fx  %s\n", ts, tp,
                ts / tp, same ? "yes" : "NO");
  }

  return 0;
}
