#ifndef DDS_PARALLEL_HPP
#define DDS_PARALLEL_HPP

#include <algorithm>
#include <cstdint>
#include <thread>
#include <vector>

namespace dds {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `threads` workers.
/// Callers must write to disjoint outputs only; reductions happen afterwards
/// in index order so results do not depend on the thread count.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
  if (n <= 0) return;
  const int workers = std::max(1, static_cast<int>(std::min<std::int64_t>(threads, n)));
  if (workers == 1) {
    fn(std::int64_t{0}, n);
    return;
  }
  const std::int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::int64_t begin = w * chunk;
    const std::int64_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace dds

#endif
