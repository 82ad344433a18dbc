#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace fairrec {

// Worker count: FAIRREC_THREADS if set and positive, else hardware concurrency.
inline unsigned thread_count() {
  if (const char* env = std::getenv("FAIRREC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs fn(block) for block in [0, blocks). Blocks are distributed round-robin
// by index, so the set of blocks a worker owns is a function of the worker
// count only; callers that key results by block index get scheduling-neutral
// output for any worker count.
inline void parallel_blocks(std::size_t blocks, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = std::min<std::size_t>(thread_count(), blocks ? blocks : 1);
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t b = w; b < blocks; b += workers) fn(b);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fairrec
