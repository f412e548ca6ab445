#pragma once
// ============================================================================
// Thread control and deterministic parallel primitives.
//
// All loops and reductions in the library route through these helpers.  The
// chunk decomposition depends only on (loop size, configured thread count),
// and reductions always accumulate the per-chunk partial sums in chunk order,
// so results are bitwise reproducible for a fixed thread count.  Threading is
// opt-in (default 1); at the moderate grid sizes used by the verification
// presets the serial path is usually fastest anyway.
// ============================================================================

#include <cstdint>
#include <functional>
#include <vector>

namespace nsch {

/// Set the global worker thread count (clamped to [1, 256]).
void set_num_threads(int n);

/// Current global worker thread count.
int num_threads();

/// Splits [0, n) into num_threads() contiguous chunks and runs
/// body(begin, end) for each.  Chunks may execute concurrently; the
/// decomposition itself is a pure function of (n, thread count).
void parallel_for(std::int64_t n, const std::function<void(std::int64_t, std::int64_t)>& body);

/// Deterministic sum reduction over [0, n): evaluates term(i) for each index,
/// accumulating left-to-right within a chunk and then summing the per-chunk
/// partials in chunk order.  Bitwise reproducible for a fixed thread count.
double parallel_sum(std::int64_t n, const std::function<double(std::int64_t)>& term);

/// Deterministic max reduction over [0, n) (max is associative/commutative in
/// exact arithmetic and on IEEE doubles without NaN, so chunking is harmless;
/// kept here so every reduction uses one code path).
double parallel_max(std::int64_t n, const std::function<double(std::int64_t)>& term);

} // namespace nsch
