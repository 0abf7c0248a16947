#pragma once

#include <cstddef>
#include <functional>

namespace fringekit {

/// Worker cap used by every row-parallel loop in the library. Defaults to 1;
/// the CLI raises it from --threads. Results never depend on this value.
void set_thread_count(int n);
int thread_count();

/// Calls fn(begin, end) over disjoint contiguous chunks of [0, n). Each index
/// is visited exactly once; callers write only to slots owned by their
/// indices, so output is independent of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace fringekit
