#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gridfeas::detail {

// Worker count: the explicit cap if nonzero, else GRIDFEAS_THREADS, else the
// hardware concurrency. Never less than one.
inline unsigned worker_count(unsigned cap = 0) {
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GRIDFEAS_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value > 0) workers = std::min(workers, static_cast<unsigned>(value));
    } catch (...) {
    }
  }
  if (cap > 0) workers = std::min(workers, cap);
  return workers;
}

// Runs fn(i) for i in [0, count) on a strided partition of the index range.
// fn must only write to slot i of its outputs; the first exception thrown by
// any worker is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < count; i += workers) fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace gridfeas::detail
