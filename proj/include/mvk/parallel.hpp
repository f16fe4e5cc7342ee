#pragma once

#include <cstddef>
#include <functional>

namespace mvk {

/// Worker count used by all data-parallel loops. Results never depend on it.
std::size_t thread_count() noexcept;
void set_thread_count(std::size_t n) noexcept;

/// Initializes the worker count from MVK_THREADS (falls back to hardware
/// concurrency). Returns the value in effect.
std::size_t init_threads_from_env();

/// Calls body(begin, end) on disjoint contiguous ranges covering [0, n).
/// The partition may vary with the thread count, so body must only write
/// per-index state.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mvk
