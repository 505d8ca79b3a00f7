#include "dequant/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dequant/error.hpp"

namespace dequant::kernels {

namespace {

void check_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kInvalidArgument, "truth and estimate differ in length");
}

// Counts for one pair with truth[i] above truth[j] by more than the tolerance.
inline void tally(double ei, double ej, double tolerance, std::int64_t& reversed, std::int64_t& tied) {
  const double d = ei - ej;
  if (std::abs(d) < tolerance) {
    ++tied;
  } else if (d < 0) {
    ++reversed;
  }
}

class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}

  void add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  /// Number of inserted positions below `end`.
  std::int64_t prefix(std::size_t end) const {
    std::int64_t s = 0;
    for (std::size_t i = end; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

}  // namespace

KendallCounts kendall_counts_serial(std::span<const double> truth, std::span<const double> estimate,
                                    double truth_tolerance, double estimate_tolerance) {
  check_same_length(truth, estimate);
  KendallCounts c;
  const std::size_t n = truth.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (!(truth[i] - truth[j] > truth_tolerance)) continue;
      ++c.ordered;
      tally(estimate[i], estimate[j], estimate_tolerance, c.reversed, c.tied);
    }
  }
  return c;
}

KendallCounts kendall_counts_parallel(std::span<const double> truth, std::span<const double> estimate,
                                      double truth_tolerance, double estimate_tolerance) {
  check_same_length(truth, estimate);
  const auto n = static_cast<std::int64_t>(truth.size());
  std::int64_t ordered = 0;
  std::int64_t reversed = 0;
  std::int64_t tied = 0;
#pragma omp parallel for schedule(static) reduction(+ : ordered, reversed, tied)
  for (std::int64_t i = 0; i < n; ++i) {
    const double ti = truth[i];
    const double ei = estimate[i];
    for (std::int64_t j = 0; j < n; ++j) {
      if (!(ti - truth[j] > truth_tolerance)) continue;
      ++ordered;
      tally(ei, estimate[j], estimate_tolerance, reversed, tied);
    }
  }
  return {ordered, reversed, tied};
}

KendallCounts kendall_counts_sorted(std::span<const double> truth, std::span<const double> estimate,
                                    double truth_tolerance, double estimate_tolerance) {
  check_same_length(truth, estimate);
  const std::size_t n = truth.size();

  std::vector<std::size_t> by_truth(n);
  std::iota(by_truth.begin(), by_truth.end(), 0);
  std::stable_sort(by_truth.begin(), by_truth.end(), [&](std::size_t a, std::size_t b) { return truth[a] < truth[b]; });

  std::vector<std::size_t> by_estimate(n);
  std::iota(by_estimate.begin(), by_estimate.end(), 0);
  std::stable_sort(by_estimate.begin(), by_estimate.end(),
                   [&](std::size_t a, std::size_t b) { return estimate[a] < estimate[b]; });
  std::vector<double> sorted_estimate(n);
  std::vector<std::size_t> estimate_rank(n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted_estimate[k] = estimate[by_estimate[k]];
    estimate_rank[by_estimate[k]] = k;
  }

  // Both difference predicates are monotone in the sorted value, so every
  // query is a partition point. Evaluating the same subtraction as the
  // double loop keeps the counts identical, rounding included.
  auto first_where = [&](auto&& pred) {
    return static_cast<std::size_t>(std::partition_point(sorted_estimate.begin(), sorted_estimate.end(),
                                                         [&](double e) { return !pred(e); }) -
                                    sorted_estimate.begin());
  };

  KendallCounts c;
  Fenwick inserted(n);
  std::size_t next = 0;
  for (std::size_t i : by_truth) {
    const double ti = truth[i];
    while (next < n && ti - truth[by_truth[next]] > truth_tolerance) inserted.add(estimate_rank[by_truth[next++]]);
    const auto below = static_cast<std::int64_t>(next);
    if (below == 0) continue;
    c.ordered += below;

    const double ei = estimate[i];
    // Lower items j with ei - e_j < tol and e_j - ei < tol are ties; the rest
    // of those above ei are reversals.
    const std::size_t tie_begin = first_where([&](double e) { return ei - e < estimate_tolerance; });
    const std::size_t reversal_begin = first_where([&](double e) { return e - ei >= estimate_tolerance && e - ei > 0; });
    const std::int64_t at_or_above_tie = below - inserted.prefix(tie_begin);
    const std::int64_t reversals = below - inserted.prefix(reversal_begin);
    c.reversed += reversals;
    c.tied += at_or_above_tie - reversals;
  }
  return c;
}

std::int64_t count_ties_serial(std::span<const double> values, double tolerance) {
  std::int64_t ties = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) ties += std::abs(values[i] - values[j]) < tolerance;
  }
  return ties;
}

std::int64_t count_ties_parallel(std::span<const double> values, double tolerance) {
  const auto n = static_cast<std::int64_t>(values.size());
  std::int64_t ties = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : ties)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = i + 1; j < n; ++j) ties += std::abs(values[i] - values[j]) < tolerance;
  }
  return ties;
}

std::int64_t count_ties_sorted(std::span<const double> values, double tolerance) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::int64_t ties = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double v = sorted[i];
    const auto end = std::partition_point(sorted.begin() + static_cast<std::ptrdiff_t>(i) + 1, sorted.end(),
                                          [&](double e) { return e - v < tolerance; });
    ties += end - (sorted.begin() + static_cast<std::ptrdiff_t>(i) + 1);
  }
  return ties;
}

}  // namespace dequant::kernels
