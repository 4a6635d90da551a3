#pragma once

#include <cstddef>
#include <functional>

namespace l2m {

// Worker cap: L2M_THREADS if set to a positive integer, else hardware concurrency.
unsigned thread_limit();

// Runs fn(i) for i in [0, n) across up to thread_limit() threads. Work is
// split into contiguous blocks; the exception from the lowest failing index
// is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace l2m
