#pragma once

#include <cstddef>
#include <functional>

namespace fraclab {

/// Worker count from FRACLAB_THREADS, else hardware concurrency (>= 1).
/// `requested` > 0 wins over both but is still capped by FRACLAB_THREADS.
unsigned resolve_threads(unsigned requested = 0);

/// Calls fn(i) for i in [0, count) over `threads` workers with static
/// interleaved assignment. fn must only write to slots owned by i. The first
/// exception thrown by any task is rethrown after all workers join.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace fraclab
