#pragma once

#include <functional>

namespace gml {

/// Number of workers `threads` resolves to (0 means hardware concurrency).
int resolve_threads(int threads);

/// Runs fn(i) for i in [0, n) over `threads` workers, splitting the range
/// into contiguous chunks. Callers must write results into per-index slots,
/// which makes the output independent of scheduling. If any call throws,
/// the exception from the lowest failing index is rethrown after all
/// workers finish.
void parallel_for(int n, const std::function<void(int)>& fn, int threads = 0);

}  // namespace gml
