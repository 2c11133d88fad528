#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace percept {

// Runs f(i, worker) for i in [0, n) on `threads` workers; worker ids are
// dense in [0, threads). Work items must write only to their own slots; then
// results are identical for any thread count.
template <class F>
inline void parallel_for_index(size_t n, int threads, F&& f) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) f(i, 0);
    return;
  }
  std::atomic<size_t> next{0};
  auto worker = [&](int id) {
    for (;;) {
      const size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      f(i, id);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads) - 1);
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker, t);
  worker(0);
  for (auto& th : pool) th.join();
}

}  // namespace percept
