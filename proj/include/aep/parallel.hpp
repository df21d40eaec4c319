#pragma once

#include <cstddef>
#include <functional>

namespace aep {

// Process-wide cap on worker threads. 0 means "use hardware concurrency".
void set_thread_count(std::size_t n);
std::size_t thread_count();

// Runs body(i) for every i in [0, n). Each index is visited exactly once and
// callers write results into per-index slots, so output never depends on the
// schedule. Calls made from inside a worker run sequentially.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace aep
