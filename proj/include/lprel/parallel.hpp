#ifndef LPREL_PARALLEL_HPP
#define LPREL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace lprel {

/// Worker cap from LASER_THREADS (falls back to hardware concurrency).
int worker_count();

/// Runs fn(i) for i in [0, n) on a bounded pool. Each index must manage
/// its own RNG stream so results are independent of scheduling; the first
/// exception thrown by any worker is rethrown after the join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace lprel

#endif  // LPREL_PARALLEL_HPP
