#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace stlcbf {

// Worker count: STLCBF_WORKERS env var when set, else hardware concurrency.
int worker_count();

std::size_t chunk_count(std::uint64_t n, std::uint64_t chunk_size);

// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
// Chunk boundaries depend only on n and chunk_size, never on the worker
// count, so per-chunk outputs can be reduced in chunk order for results that
// do not change with parallelism.
void parallel_chunks(
    std::uint64_t n, std::uint64_t chunk_size,
    const std::function<void(std::size_t, std::uint64_t, std::uint64_t)>& fn);

}  // namespace stlcbf
