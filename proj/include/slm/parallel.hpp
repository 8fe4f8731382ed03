#pragma once

// Process-wide worker count for trial loops. Trials draw from their own RNG
// streams and write to their own slots, so results do not depend on it.

#include <cstddef>
#include <functional>

namespace slm {

/// 0 selects std::thread::hardware_concurrency().
void set_thread_count(std::size_t n);
std::size_t thread_count() noexcept;

/// Calls f(i) for i in [0, n), spread over thread_count() workers. The first
/// exception thrown by any call is rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

}  // namespace slm
