#pragma once

#include <cstddef>
#include <functional>

namespace advclaim {

// Worker cap from ADVCLAIM_THREADS; 1 when unset or invalid.
std::size_t worker_count();

// Runs body(i) for i in [0, n), split into contiguous chunks across at most
// worker_count() threads. Bodies must only write to index-owned state.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace advclaim
