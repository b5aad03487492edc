#ifndef WULFF_PARALLEL_HPP_
#define WULFF_PARALLEL_HPP_

#include <functional>

namespace wulff {

// Number of worker threads used by the row-parallel kernels. Defaults to the
// WULFF_WORKERS environment variable, else 1.
int worker_count();
void set_worker_count(int n);

// Calls fn(begin, end) on contiguous chunks covering [0, n). Chunks are
// fixed by n and the worker count; with one worker fn(0, n) runs inline.
void parallel_for(int n, const std::function<void(int, int)>& fn);

}  // namespace wulff

#endif  // WULFF_PARALLEL_HPP_
