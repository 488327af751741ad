#pragma once

#include <cstddef>
#include <functional>

// Shared-memory helpers with reproducible floating-point results.
//
// All reductions chunk the index space into fixed 4096-element blocks,
// accumulate each block sequentially, and combine the block partials in a
// fixed pairwise tree.  The result is bit-identical for any thread count,
// which is what makes report-level determinism checkable.

namespace perfhom::par {

/// Set the global worker count (1 = serial).  Values < 1 clamp to 1.
void set_threads(int n);
int threads();

/// Runs body(begin, end) over a partition of [0, n).  Writes inside the body
/// must be disjoint per index; no ordering between chunks is guaranteed.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sum_sq(const double* a, std::size_t n);
double max_abs(const double* a, std::size_t n);

} // namespace perfhom::par
