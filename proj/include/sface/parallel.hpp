#pragma once

#include <cstdint>
#include <functional>

namespace sface {

// Worker-pool size used by every parallel loop in the library. Defaults to
// SFACE_THREADS if set, else the OpenMP default. Results are bit-identical
// for any setting: work items write only to their own index, and reductions
// run serially in index order afterwards.
int max_threads();
void set_max_threads(int n);

// True while called from inside one of our parallel loops; used to keep
// nested work (e.g. the bootstrap inside one simulation repetition) serial.
bool in_parallel_region();

// Runs fn(i) for i in [0, n). fn must only touch state owned by index i.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

// Serial reference for the same contract; tests compare the two bitwise.
void serial_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace sface
