#ifndef HOBZ_PARALLEL_HPP
#define HOBZ_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace hobz {

// Runs fn(i) for i in [0, n) across up to n_threads workers. Work items must
// be independent; callers own any deterministic reduction of the results.
template <typename F>
void parallel_for(std::size_t n, unsigned n_threads, F&& fn) {
  if (n_threads == 0) n_threads = std::thread::hardware_concurrency();
  if (n_threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  const unsigned count = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  workers.reserve(count);
  for (unsigned w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : workers) t.join();
}

}  // namespace hobz

#endif
