#pragma once

#include <cstddef>
#include <functional>

namespace dhym {

// Data-parallel width: DHYM_THREADS when set (clamped to >= 1), otherwise
// hardware concurrency.
int thread_width();

// Number of fixed-size blocks covering `count` items.
std::size_t block_count(std::size_t count, std::size_t block_size);

// Runs fn(block_index, begin, end) over contiguous fixed-size blocks of
// [0, count). Blocks are distributed over up to thread_width() workers.
// Per-block results indexed by block_index and combined serially by the
// caller are independent of the worker count, which keeps reductions
// deterministic.
void parallel_blocks(std::size_t count, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace dhym
