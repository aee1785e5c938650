#pragma once

#include <cstddef>
#include <functional>

namespace modsig {

/// Worker count: hardware concurrency, capped by the MODSIG_THREADS
/// environment variable when it holds a positive integer.
std::size_t worker_count();

/// Calls `body(i)` for every i in [0, count) on up to `workers` threads.
/// Indices are handed out dynamically; callers write results into
/// per-index slots so the outcome is independent of scheduling. The first
/// exception thrown by `body` is rethrown after all workers join.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace modsig
