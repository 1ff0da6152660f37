#pragma once

#include <cstddef>
#include <functional>

namespace trunckern {

/// Number of worker threads used by parallel_for. Defaults to the hardware
/// concurrency, capped by the TRUNCKERN_THREADS environment variable.
int thread_count();

/// Runs fn(begin, end) over a partition of [0, n). Each index is processed by
/// exactly one thread, so per-index outputs are deterministic regardless of
/// the thread count. Falls back to a serial call for small n.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace trunckern
