#pragma once

#include <cstdlib>
#include <thread>

namespace unmix {

// Worker-parallelism cap: UNMIX_THREADS env var, default machine cores.
// Parallel loops only ever split independent output elements, so results do
// not depend on the thread count.
inline int worker_threads() {
  static int cached = [] {
    if (const char* env = std::getenv("UNMIX_THREADS")) {
      int v = std::atoi(env);
      if (v >= 1) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
  }();
  return cached;
}

}  // namespace unmix
