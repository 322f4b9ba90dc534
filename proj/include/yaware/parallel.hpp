#pragma once

#include <cstddef>
#include <functional>

namespace yaware {

// Worker count: YAWARE_THREADS if set (clamped to >= 1), else hardware
// concurrency. Re-read on every call.
int worker_count();

// Runs fn(i) for i in [0, n). Work items must write only to their own output
// slots; scheduling order is unspecified, so results are deterministic exactly
// when outputs are disjoint by index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace yaware
