#include "fraclab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace fraclab {

unsigned resolve_threads(unsigned requested) {
  unsigned cap = 0;
  if (const char* env = std::getenv("FRACLAB_THREADS")) {
    try {
      cap = static_cast<unsigned>(std::max(0L, std::stol(env)));
    } catch (const std::exception&) {
      cap = 0;
    }
  }
  unsigned n = requested;
  if (n == 0) n = cap != 0 ? cap : std::thread::hardware_concurrency();
  if (cap != 0) n = std::min(n, cap);
  return std::max(1u, n);
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(
      std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace fraclab
