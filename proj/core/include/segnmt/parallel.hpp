#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace segnmt {

/// Calls f(k) for k in [0, count) on up to `workers` threads. Tasks are
/// handed out by an atomic counter, so callers must write results to
/// per-index slots. The first exception thrown by any task is rethrown.
template <class F>
void parallel_for(std::size_t count, std::size_t workers, F&& f) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t k = 0; k < count; ++k) f(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        f(k);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(count);
      }
    }
  };
  {
    std::vector<std::jthread> threads;
    std::size_t n = workers < count ? workers : count;
    for (std::size_t t = 0; t < n; ++t) threads.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace segnmt
