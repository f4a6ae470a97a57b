#pragma once

#include <cstddef>
#include <functional>

namespace handover {

/// Calls fn(i) for every i in [0, n) on up to `jobs` worker threads (the caller's
/// thread included). Tasks are claimed from a shared counter; results must be stored
/// by index so the outcome does not depend on scheduling. If tasks throw, the
/// exception of the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace handover
