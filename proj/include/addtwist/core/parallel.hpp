#pragma once
// Static-partition fan-out over an index range.  Work items must write only to
// their own output slot; the caller merges in index order, which keeps every
// reduction bitwise reproducible regardless of the worker count.

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace addtwist {

template <class F>
void parallel_for(std::size_t count, int workers, F&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t nthreads = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nthreads);
  pool.reserve(nthreads);
  for (std::size_t t = 0; t < nthreads; ++t) {
    pool.emplace_back([&, t] {
      try {
        // strided assignment balances work when cost grows with the index
        for (std::size_t i = t; i < count; i += nthreads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace addtwist
