#pragma once

#include <cstddef>
#include <functional>

namespace ricci {

/// Caps the number of worker threads used by parallel loops. 0 restores the
/// hardware default.
void set_max_threads(int n);
int max_threads();

/// Runs fn(i) for i in [0, n). Work is split into contiguous blocks; results
/// must be written to disjoint locations so the loop stays deterministic
/// regardless of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace ricci
