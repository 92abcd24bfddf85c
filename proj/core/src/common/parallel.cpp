#include "stlcbf/common/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace stlcbf {

int worker_count() {
  if (const char* env = std::getenv("STLCBF_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::size_t chunk_count(std::uint64_t n, std::uint64_t chunk_size) {
  if (n == 0) return 0;
  return static_cast<std::size_t>((n + chunk_size - 1) / chunk_size);
}

void parallel_chunks(
    std::uint64_t n, std::uint64_t chunk_size,
    const std::function<void(std::size_t, std::uint64_t, std::uint64_t)>& fn) {
  const std::size_t chunks = chunk_count(n, chunk_size);
  if (chunks == 0) return;

  const int workers = worker_count();
  if (workers <= 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::uint64_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      const std::uint64_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
  };

  const int nthreads = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(workers), chunks));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads - 1));
  for (int i = 0; i < nthreads - 1; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
}

}  // namespace stlcbf
