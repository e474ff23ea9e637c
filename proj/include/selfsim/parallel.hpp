#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace selfsim {

// Worker count: hardware concurrency, capped by the SELFSIM_THREADS environment variable.
int thread_count();

// Runs body(i) for i in [0, count) on up to thread_count() threads; the first exception is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace selfsim
