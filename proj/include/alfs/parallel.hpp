#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace alfs {

inline constexpr const char* kThreadsEnv = "ALFS_NUM_THREADS";

/// Worker count from ALFS_NUM_THREADS; defaults to 1.
inline int thread_count() {
  const char* env = std::getenv(kThreadsEnv);
  if (env == nullptr) return 1;
  const int n = std::atoi(env);
  if (n <= 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return n;
}

/// Runs fn(i) for i in [0, count). Each index is handled exactly once;
/// callers write results into per-index slots so output order never depends
/// on scheduling. The first exception is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn, int threads = thread_count()) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), count);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace alfs
