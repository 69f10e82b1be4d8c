#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <thread>
#include <vector>

namespace pcqa {

/// Number of workers to use when the caller passes 0.
inline unsigned default_jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Runs body(i) for i in [0, count) on up to `jobs` threads. Each index is
/// visited exactly once; results must be written to per-index slots so the
/// output does not depend on the schedule. The first exception is rethrown.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body);

/// Pairwise (cascade) summation. Error grows as O(log n) instead of O(n).
double pairwise_sum(std::span<const double> values);

/// Sum of f(i) over [0, count), evaluated in fixed-size blocks whose partial
/// sums are combined pairwise. Block boundaries depend only on `count`, so
/// the result is bit-identical for every `jobs` value.
double deterministic_sum(std::size_t count, unsigned jobs, const std::function<double(std::size_t)>& f);

}  // namespace pcqa
