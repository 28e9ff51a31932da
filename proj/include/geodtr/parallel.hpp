#pragma once

#include <functional>

namespace geodtr {

/// Worker count: hardware concurrency capped by the GEODTR_THREADS
/// environment variable (values < 1 are treated as 1).
int worker_count();

/// Runs fn(0..n-1). Work items must be independent; callers that need a
/// deterministic reduction accumulate into per-index slots and reduce in
/// index order afterwards. sequential=true forces single-threaded execution.
void parallel_for(int n, const std::function<void(int)>& fn,
                  bool sequential = false);

}  // namespace geodtr
