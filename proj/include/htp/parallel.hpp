#pragma once

#include <cstddef>
#include <functional>

namespace htp {

// Worker count: HTP_THREADS if set (>= 1), else hardware concurrency.
int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads; rethrows the first exception.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn, int max_workers = 0);

}  // namespace htp
