#pragma once

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace fdlkg {

// Fixed-chunk map: work items are split into chunks whose boundaries do not
// depend on the worker count, and per-chunk partials come back in chunk order,
// so any reduction over them is reproducible for every --threads value.
template <class Partial, class ChunkFn>
std::vector<Partial> parallel_chunks(std::size_t n_items, int n_threads, std::size_t chunk_size,
                                     ChunkFn fn) {
  if (chunk_size < 1) chunk_size = 1;
  const std::size_t n_chunks = (n_items + chunk_size - 1) / chunk_size;
  std::vector<Partial> partials(n_chunks);
  if (n_chunks == 0) return partials;

  auto run_chunk = [&](std::size_t c) {
    const std::size_t b = c * chunk_size;
    const std::size_t e = std::min(b + chunk_size, n_items);
    fn(c, b, e, partials[c]);
  };

  if (n_threads <= 1 || n_chunks == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) run_chunk(c);
    return partials;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      try {
        run_chunk(c);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int nt = std::min<std::size_t>(n_threads, n_chunks);
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return partials;
}

inline int default_threads() {
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

}  // namespace fdlkg
