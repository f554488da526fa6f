#pragma once

#include <cstddef>
#include <functional>

namespace adaam {

/// Upper bound on worker threads used inside library calls. Initialized from
/// the ADAAM_THREADS environment variable, else hardware concurrency.
std::size_t max_threads() noexcept;

/// Overrides the thread cap for the current process; 0 restores the default.
void set_max_threads(std::size_t count) noexcept;

/// Calls body(i) for every i in [0, count). Indices are split into contiguous
/// blocks across workers; body must only write state owned by index i, which
/// keeps results independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace adaam
