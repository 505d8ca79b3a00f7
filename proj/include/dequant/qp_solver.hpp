#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace dequant {

/// y[upper] - y[lower] >= gap.
struct PairConstraint {
  std::size_t upper;
  std::size_t lower;
  double gap;
};

/// minimize  0.5 * y'Qy + c'y
/// subject to lo <= y <= hi and every pair constraint.
///
/// Q must be symmetric positive definite and stored with both triangles.
struct QPProblem {
  Eigen::SparseMatrix<double> quadratic;
  Eigen::VectorXd linear;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<PairConstraint> pairs;

  std::size_t size() const { return static_cast<std::size_t>(linear.size()); }
  double objective(const Eigen::VectorXd& y) const;
  /// Largest violation of any box or pair constraint (0 when feasible).
  double max_violation(const Eigen::VectorXd& y) const;
  /// Throws Error(kInvalidArgument) if dimensions or indices disagree.
  void check_shape() const;
};

struct SolverSettings {
  double feasibility_tolerance = 1e-6;
  /// Bound on the stationarity residual ||Qy + c - A'nu||_inf divided by
  /// max(1, ||Qy||_inf, ||c||_inf, ||A'nu||_inf).
  double optimality_tolerance = 1e-8;
  int max_iterations = 50000;

  // Operator-splitting internals.
  double rho = 0.1;
  double sigma = 1e-6;
  double relaxation = 1.6;
  double admm_tolerance = 1e-5;
  int polish_rounds = 25;
};

struct Residuals {
  double primal_infeasibility = 0.0;
  double stationarity = 0.0;
};

struct Solution {
  Eigen::VectorXd values;
  /// Nonnegative multipliers, boxes first (lower then upper, n each) followed
  /// by one per pair constraint.
  Eigen::VectorXd multipliers;
  double objective_value = 0.0;
  int iterations = 0;
  Residuals residuals;
};

/// Unique minimizer of a strictly convex QP. Runs a feasibility pre-check,
/// then over-relaxed ADMM on the constraint splitting, then polishes on the
/// detected active set until the KKT conditions hold to tolerance.
///
/// Throws Error(kInfeasible) with a witness chain when the constraints cannot
/// be met, Error(kCycle) for positive-gap cycles and Error(kMaxIterations)
/// when tolerances are not reached.
Solution solve(const QPProblem& problem, const SolverSettings& settings = {});

/// Same, starting ADMM from `start` instead of the box midpoint.
Solution solve(const QPProblem& problem, const SolverSettings& settings, const Eigen::VectorXd& start);

struct FeasibilityReport {
  bool feasible = true;
  /// Variables along the chain that overflows its box, from the variable
  /// whose lower bound starts the chain to the one whose upper bound breaks.
  std::vector<std::size_t> witness;
  /// Tightest lower bounds implied by the pair constraints. When feasible this
  /// point satisfies every constraint.
  Eigen::VectorXd tightened_lower;
  Eigen::VectorXd tightened_upper;
};

/// Longest-path propagation of pair gaps through the constraint graph.
/// Throws Error(kCycle) if pair constraints form a cycle of positive total gap.
FeasibilityReport check_feasibility(const QPProblem& problem);

/// Exhaustive search over a coarse-to-fine lattice of the box followed by a
/// feasible pattern search. Test oracle only; requires problem.size() <= 6,
/// otherwise throws Error(kDimensionTooLarge).
Solution brute_force_minimize(const QPProblem& problem, double grid_step);

using ObjectiveFn = std::function<double(const Eigen::VectorXd&)>;

/// Generic form of the lattice search used by brute_force_minimize, for
/// convex objectives that are not assembled as a QP. The constraint set is
/// taken from `constraints` (its quadratic and linear parts are ignored).
Eigen::VectorXd brute_force_search(const QPProblem& constraints, const ObjectiveFn& objective, double grid_step);

}  // namespace dequant
