#include "dequant/qv.hpp"

#include <cmath>
#include <exception>

#include <fmt/format.h>

#include "dequant/error.hpp"
#include "dequant/metrics.hpp"

namespace dequant {

namespace {

constexpr int kGridSize = 40;
constexpr double kGridExponentStep = 0.25;
// Errors closer than this count as equal; the smaller lambda wins.
constexpr double kErrorTieSlack = 1e-12;

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0) || !std::isfinite(grid[i])) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("lambda grid entry {} is not positive", grid[i]));
    }
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw Error(ErrorCode::kInvalidArgument, "lambda grid must be strictly increasing");
    }
  }
}

}  // namespace

int ceil_half(int z) { return z >= 0 ? (z + 1) / 2 : -((-z) / 2); }

std::vector<double> default_lambda_grid() {
  std::vector<double> grid(kGridSize);
  for (int t = 0; t < kGridSize; ++t) grid[t] = std::exp(kGridExponentStep * t);
  return grid;
}

double kendall_validation_loss(std::span<const double> truth, std::span<const double> estimate) {
  return kendall_tau_error({{truth.begin(), truth.end()}, {estimate.begin(), estimate.end()}});
}

ReviewDataset coarsen(const ReviewDataset& dataset, const std::function<int(int)>& quantizer) {
  const auto& assignment = dataset.assignment();
  std::vector<Review> reviews;
  reviews.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    reviews.push_back({assignment.reviewer_id(i), assignment.paper_id(i), quantizer(dataset.score(i))});
  }
  const ScoreScale scale{quantizer(dataset.scale().lower), quantizer(dataset.scale().upper)};
  return ReviewDataset(scale, std::move(reviews), derive_rankings(assignment, scores_as_reals(dataset)));
}

QVReport select_lambda(const ReviewDataset& dataset, const QVConfig& config, const DequantizerConfig& deq_config) {
  check_grid(config.grid);
  ensure_valid(dataset);
  const std::vector<double> truth = scores_as_reals(dataset);
  bool all_tied = true;
  for (double z : truth) all_tied = all_tied && z == truth.front();
  if (all_tied) throw Error(ErrorCode::kDegenerateValidation, "all original scores are equal; validation loss is undefined");

  const ReviewDataset coarse = coarsen(dataset, config.quantizer);
  QVReport report;
  report.lambdas = config.grid;
  report.errors.assign(config.grid.size(), 0.0);
  std::vector<std::exception_ptr> failures(config.grid.size());

  const auto count = static_cast<std::int64_t>(config.grid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < count; ++t) {
    try {
      DequantizerConfig candidate = deq_config;
      candidate.lambda = config.grid[t];
      const DequantizedScores estimate = dequantize(coarse, candidate);
      report.errors[t] = config.loss(truth, estimate.values);
    } catch (...) {
      failures[t] = std::current_exception();
    }
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  for (std::size_t t = 1; t < report.errors.size(); ++t) {
    if (report.errors[t] < report.errors[report.selected_index] - kErrorTieSlack) report.selected_index = t;
  }
  report.selected_lambda = report.lambdas[report.selected_index];
  return report;
}

}  // namespace dequant
