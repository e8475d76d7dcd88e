#include "sface/parallel.hpp"

#include <atomic>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sface {

namespace {
std::atomic<int> g_threads{0};

int default_threads() {
  if (const char* env = std::getenv("SFACE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}
}  // namespace

int max_threads() {
  int n = g_threads.load(std::memory_order_relaxed);
  if (n <= 0) {
    n = default_threads();
    g_threads.store(n, std::memory_order_relaxed);
  }
  return n;
}

void set_max_threads(int n) { g_threads.store(n > 0 ? n : 0, std::memory_order_relaxed); }

bool in_parallel_region() {
#ifdef _OPENMP
  return omp_in_parallel() != 0;
#else
  return false;
#endif
}

void serial_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  for (std::int64_t i = 0; i < n; ++i) fn(i);
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn) {
  const int k = max_threads();
#ifdef _OPENMP
  if (k > 1 && n > 1 && !in_parallel_region()) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(k)
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)k;
#endif
  serial_for(n, fn);
}

}  // namespace sface
