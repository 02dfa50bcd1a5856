#pragma once

#include <cstddef>
#include <functional>

namespace dfamcar {

/// Worker cap: DFAM_CAR_THREADS if set and positive, else hardware threads.
std::size_t worker_count();

/// Runs fn(0..n-1) on up to `threads` workers. The first exception thrown by
/// any task is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace dfamcar
