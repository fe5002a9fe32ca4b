#pragma once

#include <cstddef>
#include <functional>

namespace ratkern {

/// Worker count from RATKERN_THREADS, else hardware concurrency (at least 1).
unsigned default_threads();

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = default).
/// The first exception thrown by any worker is rethrown after all join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned threads = 0);

}  // namespace ratkern
