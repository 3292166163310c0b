#include "dhym/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace dhym {

int thread_width() {
  if (const char* env = std::getenv("DHYM_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v >= 1) return v;
    } catch (...) {
      // fall through to hardware default on unparseable values
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::size_t block_count(std::size_t count, std::size_t block_size) {
  return (count + block_size - 1) / block_size;
}

void parallel_blocks(std::size_t count, std::size_t block_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  const std::size_t blocks = block_count(count, block_size);
  const int width = thread_width();
  if (width <= 1 || blocks <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      const std::size_t begin = b * block_size;
      fn(b, begin, std::min(begin + block_size, count));
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t b = next.fetch_add(1);
      if (b >= blocks) break;
      const std::size_t begin = b * block_size;
      fn(b, begin, std::min(begin + block_size, count));
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(width, blocks);
  pool.reserve(workers - 1);
  for (std::size_t i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace dhym
