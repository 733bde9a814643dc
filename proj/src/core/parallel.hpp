#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace biflab {

/// Number of worker threads: BIFLAB_THREADS env var, else hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("BIFLAB_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Static block partition of [0, n). Each index is processed exactly once and
/// workers never share output cells, so results are order-independent.
inline void parallel_for(long n, const std::function<void(long)>& body,
                         int threads = 0) {
  if (threads <= 0) threads = thread_count();
  if (threads == 1 || n < 64) {
    for (long i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  const long chunk = std::max<long>(1, n / (8 * threads));
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        long begin = next.fetch_add(chunk);
        if (begin >= n) return;
        long end = std::min(n, begin + chunk);
        for (long i = begin; i < end; ++i) body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace biflab
