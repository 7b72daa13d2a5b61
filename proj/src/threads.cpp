#include "rpsm/threads.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace rpsm {

unsigned thread_count() {
  unsigned n = 0;
  if (const char* env = std::getenv("RPSM_THREADS")) {
    try {
      n = static_cast<unsigned>(std::stoul(env));
    } catch (...) {
      n = 0;
    }
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : n;
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned workers = thread_count();
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned used = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  std::vector<std::thread> pool;
  pool.reserve(used);
  for (unsigned t = 0; t < used; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = count * t / used;
      const std::size_t hi = count * (t + 1) / used;
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace rpsm
