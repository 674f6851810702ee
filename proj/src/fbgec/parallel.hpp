#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace fbgec {

// Index-parallel loop over [0, n). Tasks must not touch shared mutable
// state; results are written into per-index slots by the caller.
inline void parallel_for(std::size_t n, std::size_t jobs,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t workers = std::min(jobs, n);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace fbgec
