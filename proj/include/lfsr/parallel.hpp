#pragma once

#include <cstddef>
#include <functional>

namespace lfsr {

// 0 means hardware concurrency
void set_thread_count(int threads);
int thread_count();

// Runs fn(i) for i in [0, n) over static contiguous chunks. Results must be
// written to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lfsr
