#ifndef RARING_PARALLEL_HPP_
#define RARING_PARALLEL_HPP_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace raring {

// Runs fn(i) for i in [0, n) on `workers` threads. Each index is handled
// exactly once; callers write results into slot i, so the outcome does not
// depend on scheduling. The first exception thrown is rethrown.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = n;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace raring

#endif  // RARING_PARALLEL_HPP_
