#pragma once

#include <cstddef>
#include <functional>

namespace eigenflow {

/// Process-wide worker count used by assembly and parameter sweeps (default 1).
void set_thread_count(int threads);
int thread_count();

/// Splits [0, n) into contiguous chunks, one per worker, and calls
/// body(begin, end, chunk). Chunk c always covers the same range for a given
/// (n, thread_count()), so callers can reduce per-chunk results in chunk order.
void parallel_chunks(std::size_t n, const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

/// Runs body(i) for every i in [0, n) across the workers.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace eigenflow
