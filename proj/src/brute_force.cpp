#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "dequant/error.hpp"
#include "dequant/qp_solver.hpp"

namespace dequant {

namespace {

constexpr std::size_t kMaxDimension = 6;
constexpr double kLatticeBudget = 2e5;
constexpr double kFeasibilitySlack = 1e-12;
constexpr double kFinestStep = 1e-10;

// Enumerates the k^n lattice points of a window, calling visit on each.
template <typename Visit>
void for_each_lattice_point(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, int k, Visit&& visit) {
  const auto n = lo.size();
  std::vector<int> digit(n, 0);
  Eigen::VectorXd point = lo;
  while (true) {
    visit(point);
    Eigen::Index d = 0;
    for (; d < n; ++d) {
      if (++digit[d] < k) {
        point[d] = k == 1 ? lo[d] : lo[d] + (hi[d] - lo[d]) * digit[d] / (k - 1);
        break;
      }
      digit[d] = 0;
      point[d] = lo[d];
    }
    if (d == n) return;
  }
}

// All nonzero vectors with entries in {-1, 0, 1}. Difference and bound
// constraints are totally unimodular, so these generate every tangent cone
// the search can run into.
std::vector<Eigen::VectorXd> pattern_directions(Eigen::Index n) {
  std::vector<Eigen::VectorXd> out;
  std::size_t total = 1;
  for (Eigen::Index i = 0; i < n; ++i) total *= 3;
  for (std::size_t code = 0; code < total; ++code) {
    Eigen::VectorXd d(n);
    std::size_t c = code;
    bool nonzero = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = static_cast<double>(static_cast<int>(c % 3) - 1);
      nonzero = nonzero || d[i] != 0.0;
      c /= 3;
    }
    if (nonzero) out.push_back(std::move(d));
  }
  return out;
}

}  // namespace

Eigen::VectorXd brute_force_search(const QPProblem& constraints, const ObjectiveFn& objective, double grid_step) {
  const auto n = static_cast<Eigen::Index>(constraints.size());
  if (constraints.size() > kMaxDimension) {
    throw Error(ErrorCode::kDimensionTooLarge,
                fmt::format("brute force supports at most {} variables, got {}", kMaxDimension, n));
  }
  if (!(grid_step > 0)) throw Error(ErrorCode::kInvalidArgument, "grid step must be positive");
  if (!constraints.lower.allFinite() || !constraints.upper.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "brute force needs finite boxes");
  }
  if (n == 0) return {};

  const auto feasibility = check_feasibility(constraints);
  if (!feasibility.feasible) throw Error(ErrorCode::kInfeasible, "no feasible lattice point exists");

  auto feasible = [&](const Eigen::VectorXd& y) { return constraints.max_violation(y) <= kFeasibilitySlack; };

  Eigen::VectorXd best = feasibility.tightened_lower;
  double best_value = objective(best);

  const int per_dim = std::max(3, static_cast<int>(std::floor(std::pow(kLatticeBudget, 1.0 / static_cast<double>(n)))));
  Eigen::VectorXd lo = constraints.lower;
  Eigen::VectorXd hi = constraints.upper;
  while (true) {
    const int k = per_dim;
    for_each_lattice_point(lo, hi, k, [&](const Eigen::VectorXd& y) {
      if (!feasible(y)) return;
      const double v = objective(y);
      if (v < best_value) {
        best_value = v;
        best = y;
      }
    });
    const double step = (hi - lo).maxCoeff() / (k - 1);
    if (step <= grid_step) break;
    lo = (best.array() - 2.0 * step).max(constraints.lower.array());
    hi = (best.array() + 2.0 * step).min(constraints.upper.array());
  }

  const auto directions = pattern_directions(n);
  double h = grid_step;
  while (h > kFinestStep) {
    double round_best = best_value;
    Eigen::VectorXd round_point = best;
    for (const auto& d : directions) {
      const Eigen::VectorXd candidate = best + h * d;
      if (!feasible(candidate)) continue;
      const double v = objective(candidate);
      if (v < round_best) {
        round_best = v;
        round_point = candidate;
      }
    }
    if (round_best < best_value) {
      best_value = round_best;
      best = round_point;
    } else {
      h *= 0.5;
    }
  }
  return best;
}

Solution brute_force_minimize(const QPProblem& problem, double grid_step) {
  problem.check_shape();
  Solution out;
  out.values = brute_force_search(
      problem, [&](const Eigen::VectorXd& y) { return problem.objective(y); }, grid_step);
  out.objective_value = problem.objective(out.values);
  out.residuals.primal_infeasibility = problem.max_violation(out.values);
  return out;
}

}  // namespace dequant
