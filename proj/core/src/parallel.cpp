#include "rggm/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace rggm {

unsigned worker_count() {
  if (const char* env = std::getenv("RGGM_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
      // fall through to the hardware default
    }
  }
  return std::max(1U, std::thread::hardware_concurrency());
}

void parallel_blocks(std::size_t count, std::size_t blocks,
                     const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  blocks = std::clamp<std::size_t>(blocks, 1, count);
  const std::size_t per = (count + blocks - 1) / blocks;
  blocks = (count + per - 1) / per;
  const unsigned workers = std::min<std::size_t>(worker_count(), blocks);

  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      body(b * per, std::min(count, (b + 1) * per));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t b = next++; b < blocks; b = next++) {
          try {
            body(b * per, std::min(count, (b + 1) * per));
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace rggm
