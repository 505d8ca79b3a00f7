#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "dequant/core_model.hpp"
#include "dequant/dequantizer.hpp"

namespace dequant {

/// ceil(z / 2), correct for negative z as well.
int ceil_half(int z);

/// exp(t / 4) for t = 0, 1, ..., 39.
std::vector<double> default_lambda_grid();

/// Validation loss of an estimate against original scores.
using ValidationLoss = std::function<double(std::span<const double> truth, std::span<const double> estimate)>;

/// Normalized Kendall error with exact truth ties and the default estimate tolerance.
double kendall_validation_loss(std::span<const double> truth, std::span<const double> estimate);

struct QVConfig {
  /// Nonempty, positive, strictly increasing.
  std::vector<double> grid = default_lambda_grid();
  /// Monotone non-decreasing.
  std::function<int(int)> quantizer = ceil_half;
  ValidationLoss loss = kendall_validation_loss;
};

struct QVReport {
  std::vector<double> lambdas;
  std::vector<double> errors;
  double selected_lambda = 0.0;
  std::size_t selected_index = 0;
};

/// Scores q(z), scale [q(lower), q(upper)], and rankings that replace the
/// originals: the strict order of the ORIGINAL scores within each reviewer.
ReviewDataset coarsen(const ReviewDataset& dataset, const std::function<int(int)>& quantizer);

/// Dequantizes the coarsened dataset at every candidate (in parallel), scores
/// each result against the original scores and returns the first minimizer,
/// so ties go to the smallest lambda. deq_config.lambda is ignored.
///
/// Throws Error(kDegenerateValidation) when every original score is equal,
/// Error(kInvalidArgument) for a malformed grid, and whatever the
/// dequantizer throws, e.g. Error(kInfeasible).
QVReport select_lambda(const ReviewDataset& dataset, const QVConfig& config, const DequantizerConfig& deq_config);

}  // namespace dequant
