#pragma once

#include <cstdint>
#include <thread>
#include <vector>

namespace hopcalc {

inline unsigned default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

// Runs body(worker_id, begin, end) on contiguous chunks of [0, n).
// Workers write into their own slots; the caller merges. Determinism is the
// caller's job (per-index RNG substreams).
template <typename Body>
void parallel_chunks(std::uint64_t n, unsigned threads, Body&& body) {
  if (threads <= 1 || n < 2) {
    body(0u, std::uint64_t{0}, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::uint64_t chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const std::uint64_t b = t * chunk;
    if (b >= n) break;
    const std::uint64_t e = std::min(n, b + chunk);
    pool.emplace_back([&body, t, b, e] { body(t, b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace hopcalc
