#include "dequant/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dequant/error.hpp"
#include "dequant/kernels.hpp"

namespace dequant {

double kendall_tau_error(const ScoreVectorPair& pair) {
  if (pair.truth.size() != pair.estimate.size()) {
    throw Error(ErrorCode::kInvalidArgument, "truth and estimate differ in length");
  }
  // The sorted sweep gives the same counts as the pair loops (see the kernel
  // tests) and outruns them from a few hundred values on, threads or not.
  const auto counts =
      kernels::kendall_counts_sorted(pair.truth, pair.estimate, pair.truth_tie_tolerance, pair.tie_tolerance);
  if (counts.ordered == 0) throw Error(ErrorCode::kAllTied, "every truth pair is tied");
  return (static_cast<double>(counts.reversed) + 0.5 * static_cast<double>(counts.tied)) /
         static_cast<double>(counts.ordered);
}

double l2_error(const ScoreVectorPair& pair) {
  if (pair.truth.size() != pair.estimate.size()) {
    throw Error(ErrorCode::kInvalidArgument, "truth and estimate differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pair.truth.size(); ++i) {
    const double d = pair.truth[i] - pair.estimate[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

int project_to_original_scale(double y_hat) { return static_cast<int>(std::floor(2.0 * y_hat)); }

double tie_fraction(std::span<const double> values, double tolerance) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const auto ties = kernels::count_ties_sorted(values, tolerance);
  return static_cast<double>(ties) / (0.5 * static_cast<double>(n) * static_cast<double>(n - 1));
}

std::vector<double> percentiles(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(n);
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n && values[order[end]] == values[order[begin]]) ++end;
    // Ranks begin+1 .. end share their mean.
    const double mean_rank = 0.5 * static_cast<double>(begin + 1 + end);
    for (std::size_t k = begin; k < end; ++k) out[order[k]] = 100.0 * (mean_rank - 0.5) / static_cast<double>(n);
    begin = end;
  }
  return out;
}

TrialStatistics trial_statistics(std::span<const double> errors) {
  if (errors.empty()) throw Error(ErrorCode::kEmpty, "no trials to summarize");
  const double n = static_cast<double>(errors.size());
  const double mean = std::accumulate(errors.begin(), errors.end(), 0.0) / n;
  if (errors.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double e : errors) ss += (e - mean) * (e - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

}  // namespace dequant
