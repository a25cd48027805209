#pragma once

#include <cstddef>
#include <functional>

namespace driftlens {

// Worker cap: DRIFTLENS_THREADS when set (minimum 1), otherwise hardware
// concurrency.
std::size_t max_threads();

// Runs fn(i) for i in [0, count) across up to max_threads() workers. Each
// index owns its output slot; any exception is rethrown on the caller after
// all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace driftlens
