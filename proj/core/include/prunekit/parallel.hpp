#pragma once

#include <cstddef>
#include <functional>

namespace prunekit {

// Worker count: PRUNEKIT_THREADS if set (>= 1), else hardware concurrency.
int thread_budget();

// Runs fn(i) for i in [0, n). Tasks must be independent; results must not
// depend on scheduling. Falls back to a serial loop when the budget is 1
// or n is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace prunekit
