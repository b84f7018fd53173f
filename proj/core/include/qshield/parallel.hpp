#pragma once

#include <cstddef>
#include <functional>

namespace qshield {

// Runs body(i) for i in [0, count) on up to `workers` threads using static
// contiguous chunks. workers <= 1 runs inline. The body must only write to
// state owned by index i; callers reduce results serially afterwards so the
// outcome does not depend on the worker count.
void parallel_for(std::size_t count, std::size_t workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace qshield
