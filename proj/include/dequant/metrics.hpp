#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dequant {

/// Estimate differences below this count as ties.
inline constexpr double kEstimateTieTolerance = 1e-4;
/// Truth tie threshold for reals read from files. Constructed truths use 0.
inline constexpr double kFileTruthTieTolerance = 1e-12;

/// Truth and estimate aligned by review index.
struct ScoreVectorPair {
  std::vector<double> truth;
  std::vector<double> estimate;
  double tie_tolerance = kEstimateTieTolerance;
  /// Truth pairs closer than this are omitted. 0 means exact equality.
  double truth_tie_tolerance = 0.0;
};

/// Over all truth-ordered pairs, globally across reviewers: reversals count
/// 1, estimate ties count 1/2, normalized by the number of such pairs.
/// Throws Error(kAllTied) when no truth pair is ordered.
double kendall_tau_error(const ScoreVectorPair& pair);

double l2_error(const ScoreVectorPair& pair);

/// Nearest integer of 2 y - 0.5 with halves rounded up, i.e. floor(2 y).
int project_to_original_scale(double y_hat);

/// Fraction of unordered pairs closer than `tolerance`. 0 for fewer than two values.
double tie_fraction(std::span<const double> values, double tolerance = kEstimateTieTolerance);

/// 100 (rank - 0.5) / n with 1-based ranks; exactly equal values share their mean rank.
std::vector<double> percentiles(std::span<const double> values);

struct TrialStatistics {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n); 0 for a single trial.
  double standard_error = 0.0;
};

/// Throws Error(kEmpty) for an empty list.
TrialStatistics trial_statistics(std::span<const double> errors);

}  // namespace dequant
