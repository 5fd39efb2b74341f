#pragma once

#include <cstddef>
#include <functional>

namespace nash {

/// Worker cap from NASH_REALIZE_THREADS (default: hardware concurrency).
unsigned thread_cap();

/// Runs body(i) for i in [0, count) on up to thread_cap() threads.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace nash
