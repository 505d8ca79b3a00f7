#include "dequant/dequantizer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "dequant/error.hpp"
#include "dequant/qv.hpp"

namespace dequant {

namespace {

void check_parameters(double lambda, double epsilon) {
  if (!(lambda > 0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("lambda must be a positive real, got {}", lambda));
  }
  if (!(epsilon > 0 && epsilon < 1)) {
    throw Error(ErrorCode::kInvalidArgument, fmt::format("epsilon must lie in (0, 1), got {}", epsilon));
  }
}

}  // namespace

QPProblem assemble(const ReviewDataset& dataset, double lambda, double epsilon) {
  check_parameters(lambda, epsilon);
  ensure_valid(dataset);

  const auto& assignment = dataset.assignment();
  const auto n = static_cast<Eigen::Index>(dataset.size());

  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t p = 0; p < assignment.num_papers(); ++p) {
    const auto reviews = assignment.reviews_of_paper(p);
    const double inv_mu = 1.0 / static_cast<double>(reviews.size());
    for (std::size_t a : reviews) {
      for (std::size_t b : reviews) {
        const double centering = (a == b ? 1.0 : 0.0) - inv_mu;
        const double fit = a == b ? lambda : 0.0;
        triplets.emplace_back(a, b, 2.0 * (centering + fit));
      }
    }
  }

  QPProblem problem;
  problem.quadratic.resize(n, n);
  problem.quadratic.setFromTriplets(triplets.begin(), triplets.end());
  problem.linear.resize(n);
  problem.lower.resize(n);
  problem.upper.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = dataset.score(static_cast<std::size_t>(i));
    problem.linear[i] = -2.0 * lambda * z;
    problem.lower[i] = z - 0.5;
    problem.upper[i] = z + 0.5;
  }
  problem.pairs.reserve(dataset.ranked_pairs().size());
  for (const auto& pair : dataset.ranked_pairs()) problem.pairs.push_back({pair.better, pair.worse, epsilon});
  return problem;
}

QPProblem assemble(const ReviewDataset& dataset, const DequantizerConfig& config) {
  if (!config.lambda) throw Error(ErrorCode::kInvalidArgument, "assemble needs a concrete lambda");
  return assemble(dataset, *config.lambda, config.epsilon);
}

double literal_objective(const ReviewDataset& dataset, double lambda, std::span<const double> y) {
  const auto& assignment = dataset.assignment();
  double consensus = 0.0;
  for (std::size_t p = 0; p < assignment.num_papers(); ++p) {
    const auto reviews = assignment.reviews_of_paper(p);
    double mean = 0.0;
    for (std::size_t i : reviews) mean += y[i];
    mean /= static_cast<double>(reviews.size());
    for (std::size_t i : reviews) consensus += (y[i] - mean) * (y[i] - mean);
  }
  double fit = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double d = y[i] - dataset.score(i);
    fit += d * d;
  }
  return consensus + lambda * fit;
}

DequantizeResult dequantize_detailed(const ReviewDataset& dataset, const DequantizerConfig& config) {
  DequantizeResult result;
  if (config.lambda) {
    result.lambda = *config.lambda;
  } else {
    result.lambda = select_lambda(dataset, QVConfig{}, config).selected_lambda;
  }

  const QPProblem problem = assemble(dataset, result.lambda, config.epsilon);
  if (dataset.size() == 1) {
    // A lone review sits at its own score; no solver round-off.
    result.scores.values = {static_cast<double>(dataset.score(0))};
    return result;
  }
  const Solution solution = solve(problem, config.solver);
  result.scores.values.assign(solution.values.begin(), solution.values.end());
  result.iterations = solution.iterations;
  result.residuals = solution.residuals;
  return result;
}

DequantizedScores dequantize(const ReviewDataset& dataset, const DequantizerConfig& config) {
  return dequantize_detailed(dataset, config).scores;
}

DequantizedScores dequantize_consensus_only(const ReviewDataset& dataset, double epsilon,
                                            const SolverSettings& solver) {
  return dequantize(dataset, DequantizerConfig{kConsensusOnlyLambda, epsilon, solver});
}

double thurstone_joint_loglikelihood(const ReviewDataset& dataset, std::span<const double> y,
                                     std::span<const double> x_star, double sigma) {
  const auto& assignment = dataset.assignment();
  if (y.size() != dataset.size() || x_star.size() != assignment.num_papers()) {
    throw Error(ErrorCode::kInvalidArgument, "likelihood inputs do not match the dataset");
  }
  if (!(sigma > 0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");

  double quadratic = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double z = dataset.score(i);
    if (y[i] < z - 0.5 || y[i] > z + 0.5) return -std::numeric_limits<double>::infinity();
    const double d = y[i] - x_star[assignment.paper_of(i)];
    quadratic += d * d;
  }
  const double normalizer = static_cast<double>(dataset.size()) * std::log(sigma * std::sqrt(2.0 * std::numbers::pi));
  return -quadratic / (2.0 * sigma * sigma) - normalizer;
}

}  // namespace dequant
