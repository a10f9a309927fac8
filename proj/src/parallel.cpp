#include "explorer/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace explorer {

void parallel_for(int n, int num_threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  const int workers = std::min(std::max(num_threads, 1), n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    const int lo = static_cast<int>(static_cast<long long>(n) * t / workers);
    const int hi = static_cast<int>(static_cast<long long>(n) * (t + 1) / workers);
    pool.emplace_back([lo, hi, &fn, &err = errors[t]] {
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        err = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

int default_thread_count() {
  if (const char* env = std::getenv("EXPLORER_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace explorer
