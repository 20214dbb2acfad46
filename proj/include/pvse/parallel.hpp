#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace pvse {

/// Worker-thread cap: PVSE_THREADS environment variable, 0 or unset = auto.
inline int worker_thread_count() {
  if (const char* env = std::getenv("PVSE_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs f(i) for i in [0, n) across worker threads. Tasks must be independent;
/// callers are responsible for writing into disjoint slots so results do not
/// depend on scheduling.
inline void parallel_for_index(int n, const std::function<void(int)>& f) {
  const int threads = std::min(worker_thread_count(), n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&]() {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace pvse
