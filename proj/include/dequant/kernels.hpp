#pragma once

#include <cstdint>
#include <span>

namespace dequant::kernels {

/// Pair counts behind the normalized Kendall error. A pair (i, j) is ordered
/// when truth[i] - truth[j] > truth_tolerance; among ordered pairs it is
/// tied when |estimate[i] - estimate[j]| < estimate_tolerance and reversed
/// when it is not tied and estimate[j] > estimate[i].
struct KendallCounts {
  std::int64_t ordered = 0;
  std::int64_t reversed = 0;
  std::int64_t tied = 0;

  friend bool operator==(const KendallCounts&, const KendallCounts&) = default;
};

/// Plain double loop. Reference for the other two.
KendallCounts kendall_counts_serial(std::span<const double> truth, std::span<const double> estimate,
                                    double truth_tolerance, double estimate_tolerance);

/// Double loop split across OpenMP threads. Same counts as the serial loop.
KendallCounts kendall_counts_parallel(std::span<const double> truth, std::span<const double> estimate,
                                      double truth_tolerance, double estimate_tolerance);

/// Sweep over truth order with a Fenwick tree over estimate order,
/// O(n log n). Same counts as the serial loop.
KendallCounts kendall_counts_sorted(std::span<const double> truth, std::span<const double> estimate,
                                    double truth_tolerance, double estimate_tolerance);

/// Unordered pairs with |values[i] - values[j]| < tolerance.
std::int64_t count_ties_serial(std::span<const double> values, double tolerance);
std::int64_t count_ties_parallel(std::span<const double> values, double tolerance);
std::int64_t count_ties_sorted(std::span<const double> values, double tolerance);

}  // namespace dequant::kernels
