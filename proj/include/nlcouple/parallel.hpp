#pragma once

#include <cstddef>
#include <functional>

namespace nlc {

/// Worker count used by `parallel_for`. Defaults to 1; 0 selects the
/// hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(i) for i in [0, n) over contiguous blocks, one per worker.
/// The body must only write to index-owned data; results are then
/// independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace nlc
