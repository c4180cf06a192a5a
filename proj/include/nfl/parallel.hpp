#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace nfl {

// Worker count: hardware concurrency capped by the NFL_THREADS environment
// variable. Thread count never influences results; it only partitions work.
inline int worker_count(int requested = 0) {
  int count = requested;
  if (count <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    count = hw == 0 ? 1 : static_cast<int>(hw);
  }
  if (const char* env = std::getenv("NFL_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1 && cap < count) {
      count = static_cast<int>(cap);
    }
  }
  return count;
}

// Runs fn(begin, end, chunk_index) over a static partition of [0, total).
// Chunk boundaries depend only on (total, threads), so any per-chunk output
// is reproducible.
inline void parallel_chunks(std::uint64_t total, int threads,
                            const std::function<void(std::uint64_t, std::uint64_t, int)>& fn) {
  if (total == 0) return;
  if (threads <= 1 || total == 1) {
    fn(0, total, 0);
    return;
  }
  const auto t = static_cast<std::uint64_t>(threads);
  const std::uint64_t chunk = (total + t - 1) / t;
  std::vector<std::thread> pool;
  for (std::uint64_t c = 0, begin = 0; begin < total; ++c, begin += chunk) {
    const std::uint64_t end = begin + chunk < total ? begin + chunk : total;
    pool.emplace_back([&fn, begin, end, c] { fn(begin, end, static_cast<int>(c)); });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace nfl
