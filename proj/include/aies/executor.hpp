#pragma once

// Executors decide how the walkers of one group are visited. Kernels only
// ever write walker i's own slot while processing i and read the frozen
// complementary group, so every executor produces bit-identical results.

#include "aies/ensemble.hpp"

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace aies {

struct SerialExecutor {
  template <class F>
  void operator()(IndexRange r, F&& f) const {
    for (std::size_t i = r.begin; i < r.end; ++i) f(i);
  }
};

/// Visits walkers back to front; used to check schedule independence.
struct ReverseExecutor {
  template <class F>
  void operator()(IndexRange r, F&& f) const {
    for (std::size_t i = r.end; i-- > r.begin;) f(i);
  }
};

/// Splits a range into contiguous chunks, one std::jthread per chunk.
class ThreadExecutor {
 public:
  explicit ThreadExecutor(unsigned threads = std::max(1u, std::thread::hardware_concurrency()))
      : threads_(std::max(1u, threads)) {}

  template <class F>
  void operator()(IndexRange r, F&& f) const {
    const std::size_t n = r.size();
    const std::size_t workers = std::min<std::size_t>(threads_, n);
    if (workers <= 1) {
      SerialExecutor{}(r, f);
      return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      const std::size_t chunk = (n + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = r.begin + w * chunk;
        const std::size_t e = std::min(r.end, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&, b, e] {
          try {
            for (std::size_t i = b; i < e; ++i) f(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  unsigned threads() const noexcept { return threads_; }

 private:
  unsigned threads_;
};

}  // namespace aies
