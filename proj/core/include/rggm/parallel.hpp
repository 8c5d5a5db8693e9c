#pragma once

#include <cstddef>
#include <functional>

namespace rggm {

// Worker cap: RGGM_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
unsigned worker_count();

// Splits [0, count) into contiguous blocks and runs body(begin, end) on up
// to worker_count() threads. Block boundaries depend only on `count` and
// `blocks`, never on the thread count, so per-block results are
// reproducible. Exceptions from any block are rethrown (first one wins).
void parallel_blocks(std::size_t count, std::size_t blocks,
                     const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace rggm
