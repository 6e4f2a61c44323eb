#pragma once

#include <cstddef>
#include <functional>

namespace wbary {

/// Upper bound on worker threads used by every parallel map. 0 restores the
/// default: WBARY_THREADS if set, otherwise the hardware concurrency.
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

/// Calls fn(i) for i in [0, count). Work is spread over at most
/// thread_limit() threads; nested calls run sequentially on the caller.
/// Results must be written to per-index slots so the outcome does not depend
/// on scheduling. The first exception thrown by fn is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace wbary
