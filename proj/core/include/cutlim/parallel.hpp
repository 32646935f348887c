#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace cutlim {

// Runs fn(i) for i in [0, count) on up to `threads` workers. Tasks must be
// independent; each writes to its own output slot, so the result of the
// whole loop does not depend on scheduling.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  int workers = std::max(1, threads);
  workers = static_cast<int>(std::min<std::size_t>(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cutlim
