#pragma once

#include <cstddef>
#include <functional>

namespace labornet {

// Upper bound on worker threads used by every parallel section.
// Zero restores the default (hardware concurrency).
void set_thread_limit(unsigned threads);
unsigned thread_limit();

// Runs body(i) for i in [0, n). Iterations must write only to slots owned by
// i, which keeps results independent of the thread count. The exception of the
// lowest failing index is rethrown after all threads join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace labornet
