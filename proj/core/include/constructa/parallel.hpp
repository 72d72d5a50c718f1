#pragma once

#include <cstddef>
#include <functional>

namespace constructa {

/// Worker count: `requested` when positive, else CONSTRUCTA_THREADS when set
/// and positive, else the hardware concurrency.
unsigned worker_count(unsigned requested = 0);

/// Calls body(i) for i in [0, n) on up to `workers` threads. Iterations are
/// handed out in contiguous blocks; results must be written to per-index
/// slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  unsigned workers = 0);

}  // namespace constructa
