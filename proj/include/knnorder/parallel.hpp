#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace knnorder {

/// Runs fn(i) once for every i in [0, n) across `workers` threads
/// (workers <= 0 selects the hardware concurrency). Work items write only to
/// their own index slots, so results are independent of the schedule.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  unsigned int t = workers > 0 ? static_cast<unsigned int>(workers)
                               : std::max(1u, std::thread::hardware_concurrency());
  t = static_cast<unsigned int>(std::min<std::size_t>(t, n));

  if (t <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(t);
  for (unsigned int w = 0; w < t; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
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
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace knnorder
