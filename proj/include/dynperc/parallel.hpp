#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dynperc {

/// Worker count used for replica fan-out (at least 1).
inline unsigned replica_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Evaluates fn(i) for i in [0, n) across workers and stores results by
/// index, so the output never depends on scheduling. Workers share nothing
/// except their disjoint slices of `out`.
template <class T, class Fn>
std::vector<T> map_replicas(std::int64_t n, Fn&& fn) {
  std::vector<T> out(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  const unsigned workers = static_cast<unsigned>(std::min<std::int64_t>(replica_workers(), std::max<std::int64_t>(n, 1)));
  if (workers <= 1) {
    for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = fn(i);
    return out;
  }
  // The exception of the lowest failing index is rethrown, again independent
  // of scheduling.
  std::mutex mu;
  std::exception_ptr error;
  std::int64_t error_index = n;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::int64_t i = w; i < n; i += workers) {
        try {
          out[static_cast<std::size_t>(i)] = fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (i < error_index) {
            error_index = i;
            error = std::current_exception();
          }
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

/// Number of i in [0, n) with pred(i) true.
template <class Pred>
std::int64_t count_replicas(std::int64_t n, Pred&& pred) {
  const auto hits = map_replicas<std::uint8_t>(n, [&](std::int64_t i) -> std::uint8_t { return pred(i) ? 1 : 0; });
  std::int64_t k = 0;
  for (auto h : hits) k += h;
  return k;
}

}  // namespace dynperc
