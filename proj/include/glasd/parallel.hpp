#pragma once

#include <cstddef>
#include <functional>

namespace glasd {

/// 0 maps to std::thread::hardware_concurrency() (at least 1).
unsigned resolve_threads(unsigned requested);

/// Runs fn(k) for every k in [0, count) on up to `threads` workers. If any
/// call throws, the exception from the lowest index is rethrown after all
/// workers have finished.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace glasd
