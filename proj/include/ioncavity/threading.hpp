#pragma once

#include <cstddef>
#include <functional>

namespace ioncavity::threading {

// 0 -> hardware concurrency (at least 1); negative -> error.
int resolve_thread_count(int requested);

// Runs task(i) for i in [0, n) on up to `threads` workers.  Tasks must be
// independent and write only to their own output slots; the first exception
// thrown by any task is rethrown on the calling thread after all workers
// join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& task);

} // namespace ioncavity::threading
