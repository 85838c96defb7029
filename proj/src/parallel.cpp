#include "springbal/parallel.hpp"

namespace springbal {

namespace {
std::atomic<int> g_threads{0};
}

void set_worker_threads(int threads) { g_threads.store(std::max(0, threads)); }

int worker_threads() {
  const int t = g_threads.load();
  if (t > 0) return t;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace springbal
