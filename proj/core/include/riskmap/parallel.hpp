#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace riskmap {

/// Runs fn(i) for i in [0, n) on up to `workers` threads using static index
/// chunking. Callers store results by index, so the outcome is identical for
/// any worker count.
template <typename Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const unsigned nthreads = static_cast<unsigned>(
      std::min<std::size_t>(workers, n));
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (unsigned w = 0; w < nthreads; ++w) {
    pool.emplace_back([&, w] {
      const std::size_t lo = n * w / nthreads;
      const std::size_t hi = n * (w + 1) / nthreads;
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace riskmap
