#pragma once

#include <algorithm>
#include <atomic>
#include <exception>
#include <thread>
#include <vector>

namespace specflow {

// Runs f(i) for i in [0, n) on up to `jobs` threads. Results land in slot i and
// the lowest failing index is rethrown, so nothing depends on scheduling.
template <class F>
auto parallel_map(int n, int jobs, F&& f) -> std::vector<decltype(f(0))> {
  using R = decltype(f(0));
  n = std::max(n, 0);
  std::vector<R> out(static_cast<size_t>(n));
  jobs = std::clamp(jobs, 1, std::max(n, 1));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          out[i] = f(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace specflow
