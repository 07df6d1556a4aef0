#pragma once

#include <cstddef>
#include <functional>

namespace p2l {

/// Worker count: P2L_THREADS if set (>= 1), else hardware concurrency.
std::size_t default_workers();

/// Calls fn(i) for i in [0, n) on up to `workers` threads, static contiguous
/// chunks. fn must write only to slot i of its output; the first exception
/// thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  std::size_t workers = 0);

}  // namespace p2l
