#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cmekit {

/// Runs fn(i) for i in [0, n) on `workers` threads. Work is split statically
/// (worker w takes i ≡ w mod workers), so each index is computed exactly once
/// and results written by index are independent of the worker count. The
/// first exception thrown (lowest index among those observed) is rethrown.
template <class Fn>
void parallel_for_index(std::size_t n, unsigned workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  if (workers > n) workers = static_cast<unsigned>(n);
  std::mutex mu;
  std::exception_ptr error;
  std::size_t error_index = n;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        {
          std::lock_guard<std::mutex> lock(mu);
          if (error && error_index < i) return;
        }
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < error_index) {
            error = std::current_exception();
            error_index = i;
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cmekit
