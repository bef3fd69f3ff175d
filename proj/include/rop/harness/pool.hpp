#pragma once

#include <cstddef>
#include <functional>

namespace rop::harness {

/// Worker count used when a spec asks for 0 threads.
unsigned default_threads();

/// Runs task(i) for i in [0, count) on at most `threads` workers. Tasks write
/// into caller-owned slots indexed by i, so the result order never depends on
/// scheduling. The first exception thrown by a task is rethrown after all
/// workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

}  // namespace rop::harness
