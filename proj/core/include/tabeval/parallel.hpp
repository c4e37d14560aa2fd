#pragma once

#include <cstddef>
#include <functional>

namespace tabeval {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// default (hardware concurrency).
void set_max_threads(std::size_t n);
std::size_t max_threads();

/// Runs body(i) for i in [0, n). Each index is processed by exactly one
/// thread; callers write results into per-index slots so the outcome never
/// depends on scheduling. Nested calls from a worker run serially. The first
/// exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace tabeval
