#pragma once

// Bounded worker pool for independent runs. Results are written by index, so
// the outcome does not depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace sslab {

inline std::size_t default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp<std::size_t>(hw == 0 ? 1 : hw, 1, 8);
}

/// Calls fn(i) for i in [0, n) on at most `workers` threads. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// workers have joined.
template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers == 0 ? default_workers() : workers, 1, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace sslab
