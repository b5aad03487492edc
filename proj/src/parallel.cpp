#include "wulff/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace wulff {

namespace {

int initial_workers() {
  if (const char* env = std::getenv("WULFF_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

std::atomic<int>& workers() {
  static std::atomic<int> n{initial_workers()};
  return n;
}

}  // namespace

int worker_count() { return workers().load(); }

void set_worker_count(int n) { workers().store(std::max(1, n)); }

void parallel_for(int n, const std::function<void(int, int)>& fn) {
  const int w = std::min(worker_count(), n);
  if (w <= 1) {
    if (n > 0) fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(w - 1));
  const int chunk = (n + w - 1) / w;
  for (int t = 1; t < w; ++t) {
    const int b = t * chunk;
    const int e = std::min(n, b + chunk);
    if (b < e) pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  fn(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

}  // namespace wulff
