#pragma once

#include <cstddef>
#include <functional>

namespace seqpr {

/// Number of workers used when the caller passes 0.
std::size_t default_thread_count();

/// Runs body(i) for every i in [0, n) on up to `threads` workers (0 = default).
/// Indices are handed out in contiguous blocks; the body must only write to
/// state owned by its index, which keeps results independent of scheduling.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace seqpr
