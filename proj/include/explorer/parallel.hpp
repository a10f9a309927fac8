#pragma once

#include <functional>

namespace explorer {

// Runs fn(i) for i in [0, n) across up to num_threads threads with a static
// contiguous partition. Joins before returning. num_threads <= 1 (or n <= 1)
// runs inline. Results must not depend on thread count; callers accumulate
// into per-index buffers and reduce sequentially afterwards.
void parallel_for(int n, int num_threads, const std::function<void(int)>& fn);

// EXPLORER_THREADS env override, else hardware concurrency.
int default_thread_count();

}  // namespace explorer
