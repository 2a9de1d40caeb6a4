#pragma once

#include <cstddef>
#include <functional>

namespace miskrige {

/// Worker count from MISKRIGE_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

/// Runs body(i) for i in [0, count). Work is split into contiguous chunks;
/// every index is processed exactly once, so results written per index are
/// independent of the chunking.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace miskrige
