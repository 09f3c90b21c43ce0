#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace gsm {

inline int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static partition of [0, count) into contiguous chunks, one per thread.
// Chunk boundaries depend only on (count, threads), never on scheduling, so
// any writer that owns its indices produces thread-count-independent bytes.
template <typename Fn>
void parallel_for(int64_t count, int threads, Fn&& fn) {
  threads = resolve_thread_count(threads);
  if (count <= 0) return;
  const int used = static_cast<int>(std::min<int64_t>(threads, count));
  if (used <= 1) {
    for (int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(used);
  std::exception_ptr error;
  std::mutex error_mutex;
  const int64_t chunk = (count + used - 1) / used;
  for (int t = 0; t < used; ++t) {
    const int64_t begin = t * chunk;
    const int64_t end = std::min(count, begin + chunk);
    pool.emplace_back([&, begin, end] {
      try {
        for (int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gsm
