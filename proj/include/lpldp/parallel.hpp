// parallel: a minimal deterministic chunk scheduler. Work is split into
// independently seeded chunks; workers steal chunk indices, so results never
// depend on the thread count.
#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace lpldp {

/// Number of worker threads to use: `requested` when > 0, else the
/// LP_LDP_THREADS environment variable, else hardware concurrency.
int resolve_threads(int requested);

/// Run body(chunk_index) for chunk_index in [0, chunks) on up to `threads`
/// workers. body must only touch chunk-owned state (or atomics).
inline void parallel_for(std::int64_t chunks, int threads,
                         const std::function<void(std::int64_t)>& body) {
  if (threads <= 1 || chunks <= 1) {
    for (std::int64_t c = 0; c < chunks; ++c) body(c);
    return;
  }
  std::atomic<std::int64_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::int64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      body(c);
    }
  };
  int nw = threads < chunks ? threads : static_cast<int>(chunks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nw));
  for (int i = 0; i < nw; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
}

}  // namespace lpldp
