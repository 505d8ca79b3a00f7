#pragma once

#include <optional>
#include <span>

#include "dequant/core_model.hpp"
#include "dequant/qp_solver.hpp"

namespace dequant {

inline constexpr double kDefaultEpsilon = 0.05;
/// Weight used for the consensus-only objective. Exactly zero would lose
/// strict convexity, so the fit term is kept at a negligible weight.
inline constexpr double kConsensusOnlyLambda = 1e-6;

struct DequantizerConfig {
  /// Weight of the fit term. std::nullopt selects it by quantization
  /// validation over the default grid.
  std::optional<double> lambda;
  double epsilon = kDefaultEpsilon;
  SolverSettings solver;
};

/// Quadratic program whose minimizer is the dequantized score vector:
///
///   sum_p sum_{r in p} (y_rp - mean_p(y))^2 + lambda * sum (y_rp - z_rp)^2
///
/// subject to z - 0.5 <= y <= z + 0.5 and y_rp >= y_rp' + epsilon for every
/// reported pair. The assembled form is 0.5 y'Qy + c'y, i.e.
/// Q = 2 (C + lambda I) and c = -2 lambda z, where C is the block diagonal of
/// per-paper centering projections I - 11'/mu_p. It differs from the sum
/// above by the constant lambda * sum z^2 (see literal_objective).
///
/// Requires a concrete positive lambda. Throws Error(kValidationError) if the
/// dataset fails validate().
QPProblem assemble(const ReviewDataset& dataset, double lambda, double epsilon);
QPProblem assemble(const ReviewDataset& dataset, const DequantizerConfig& config);

/// The objective above evaluated term by term, without assembly.
double literal_objective(const ReviewDataset& dataset, double lambda, std::span<const double> y);

struct DequantizeResult {
  DequantizedScores scores;
  double lambda = 0.0;
  int iterations = 0;
  Residuals residuals;
};

DequantizeResult dequantize_detailed(const ReviewDataset& dataset, const DequantizerConfig& config);

DequantizedScores dequantize(const ReviewDataset& dataset, const DequantizerConfig& config);

/// Fit term at kConsensusOnlyLambda.
DequantizedScores dequantize_consensus_only(const ReviewDataset& dataset, double epsilon = kDefaultEpsilon,
                                            const SolverSettings& solver = {});

/// Joint log-likelihood of latent scores y and observed quantized scores
/// under y_rp ~ N(x*_p, sigma^2) with deterministic rounding: -inf when some
/// y_rp leaves [z_rp - 0.5, z_rp + 0.5], otherwise
///   sum -(y_rp - x*_p)^2 / (2 sigma^2) - |A| log(sigma sqrt(2 pi)).
/// `x_star` is indexed by the dataset's paper indices.
double thurstone_joint_loglikelihood(const ReviewDataset& dataset, std::span<const double> y,
                                     std::span<const double> x_star, double sigma);

}  // namespace dequant
