#pragma once

#include <cstddef>
#include <functional>

namespace lrmc {

/// Worker count from the LRMC_THREADS environment variable (default 1).
unsigned default_thread_count();

/// Calls fn(i) for every i in [0, n) on up to `threads` workers. Each index
/// is handled exactly once; callers write results into per-index slots, so
/// the output does not depend on scheduling. The first exception thrown by
/// any call is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace lrmc
