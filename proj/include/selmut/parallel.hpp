#pragma once

#include <algorithm>
#include <cstddef>
#include <mutex>
#include <thread>
#include <vector>

namespace selmut {

// Process-wide cap on worker threads (set once by the CLI --threads flag).
// 0 means "use hardware concurrency".  Results never depend on this value:
// parallel loops only write disjoint per-index outputs.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n).  Chunked over at most max_threads() workers;
// each index is computed exactly once, so the result is independent of the
// thread count.  Exceptions from workers are rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  int nt = max_threads();
  if (nt <= 1 || n < 2048) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::mutex err_mu;
  std::exception_ptr err;
  std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    std::size_t lo = w * chunk, hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> g(err_mu);
        if (!err) err = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace selmut
