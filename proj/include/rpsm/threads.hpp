#pragma once

#include <cstddef>
#include <functional>

namespace rpsm {

/// Worker count: RPSM_THREADS when set and nonzero, hardware concurrency
/// otherwise (0 means auto).
unsigned thread_count();

/// Runs fn(i) for i in [0, count) across the worker threads. Items must be
/// independent; callers keep determinism by writing to disjoint slots and
/// reducing in index order afterwards.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace rpsm
