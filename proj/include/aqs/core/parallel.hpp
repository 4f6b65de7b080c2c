#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace aqs {

namespace detail {
inline thread_local bool in_parallel_region = false;
}

inline std::size_t default_concurrency() {
  const auto hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [0, n). Tasks are claimed from a shared counter so the
// result at each index is independent of scheduling. Nested calls run serially.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         std::size_t max_threads = 0) {
  if (n == 0) return;
  std::size_t threads = max_threads == 0 ? default_concurrency() : max_threads;
  threads = std::min(threads, n);
  if (threads <= 1 || detail::in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    detail::in_parallel_region = true;
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) break;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
    detail::in_parallel_region = false;
  };

  std::vector<std::jthread> pool;
  pool.reserve(threads - 1);
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  pool.clear();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace aqs
