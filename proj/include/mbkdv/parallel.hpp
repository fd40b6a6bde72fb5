#pragma once

#include <functional>

namespace mbkdv {

/// Caps worker threads used by internal loops. 0 restores the default (hardware concurrency).
void set_max_threads(int n);
int max_threads();

/// Calls body(i) for i in [begin, end). Iterations must be independent; each
/// index is handled by exactly one worker, so results do not depend on the
/// thread count.
void parallel_for(int begin, int end, const std::function<void(int)>& body);

}  // namespace mbkdv
