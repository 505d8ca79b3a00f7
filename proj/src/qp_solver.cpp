#include "dequant/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "dequant/error.hpp"

namespace dequant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;
using Triplet = Eigen::Triplet<double>;

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

// Stacked constraint operator A = [I; D] with D holding one +1/-1 row per
// pair constraint. Rows [0, n) are boxes, rows [n, n + k) are pairs.
struct Constraints {
  std::size_t n = 0;
  std::size_t m = 0;
  SpMat a;
  SpMat at;
  Vec lower;
  Vec upper;

  explicit Constraints(const QPProblem& problem) : n(problem.size()), m(problem.size() + problem.pairs.size()) {
    std::vector<Triplet> t;
    t.reserve(n + 2 * problem.pairs.size());
    for (std::size_t i = 0; i < n; ++i) t.emplace_back(i, i, 1.0);
    lower.resize(m);
    upper.resize(m);
    lower.head(n) = problem.lower;
    upper.head(n) = problem.upper;
    for (std::size_t k = 0; k < problem.pairs.size(); ++k) {
      const auto& pc = problem.pairs[k];
      t.emplace_back(n + k, pc.upper, 1.0);
      t.emplace_back(n + k, pc.lower, -1.0);
      lower[n + k] = pc.gap;
      upper[n + k] = kInf;
    }
    a.resize(m, n);
    a.setFromTriplets(t.begin(), t.end());
    at = a.transpose();
  }

  bool is_equality(std::size_t row) const { return lower[row] == upper[row]; }
};

enum class Side : unsigned char { kInactive, kLower, kUpper, kEquality };

struct PolishResult {
  bool ok = false;
  Vec x;
  Vec y;  // full-length multipliers in the P x + q + A'y = 0 convention
};

class AdmmSolver {
 public:
  AdmmSolver(const QPProblem& problem, const SolverSettings& settings)
      : problem_(problem), settings_(settings), con_(problem), n_(problem.size()), m_(con_.m) {
    const Vec diag = problem.quadratic.diagonal();
    const double largest = diag.size() ? diag.cwiseAbs().maxCoeff() : 1.0;
    cost_scale_ = 1.0 / std::max(1.0, largest);
    p_ = problem.quadratic * cost_scale_;
    q_ = problem.linear * cost_scale_;
  }

  Solution run(const Vec& start) {
    Vec x = start.cwiseMax(problem_.lower).cwiseMin(problem_.upper);
    Vec z = con_.a * x;
    z = z.cwiseMax(con_.lower).cwiseMin(con_.upper);
    Vec y = Vec::Zero(m_);

    double rho = settings_.rho;
    set_rho(rho);
    factor();

    double eps = settings_.admm_tolerance;
    const double alpha = settings_.relaxation;
    const double sigma = settings_.sigma;
    int next_polish = 100;

    for (int iter = 1; iter <= settings_.max_iterations; ++iter) {
      const Vec rhs = sigma * x - q_ + con_.at * (rho_.cwiseProduct(z) - y);
      const Vec x_tilde = llt_.solve(rhs);
      const Vec z_tilde = con_.a * x_tilde;
      x = alpha * x_tilde + (1.0 - alpha) * x;
      const Vec z_relaxed = alpha * z_tilde + (1.0 - alpha) * z;
      const Vec z_next = (z_relaxed + y.cwiseQuotient(rho_)).cwiseMax(con_.lower).cwiseMin(con_.upper);
      y += rho_.cwiseProduct(z_relaxed - z_next);
      z = z_next;

      if (iter % 10 != 0 && iter != settings_.max_iterations) continue;

      const Vec ax = con_.a * x;
      const Vec px = p_ * x;
      const Vec aty = con_.at * y;
      const double r_prim = inf_norm(ax - z);
      const double r_dual = inf_norm(px + q_ + aty);
      const double prim_scale = std::max(inf_norm(ax), inf_norm(z));
      const double dual_scale = std::max({inf_norm(px), inf_norm(aty), inf_norm(q_)});
      const bool converged = r_prim <= eps * (1.0 + prim_scale) && r_dual <= eps * (1.0 + dual_scale);

      if (converged || iter >= next_polish) {
        if (auto polished = polish(z, y); polished.ok) {
          if (auto solution = finish(polished, iter)) return *std::move(solution);
        }
        next_polish = iter + 200;
        if (converged) eps = std::max(eps * 0.1, 1e-13);
      }

      if (iter % 50 == 0) {
        const double ratio = std::sqrt((r_prim / std::max(prim_scale, 1e-30)) / std::max(r_dual / std::max(dual_scale, 1e-30), 1e-30));
        const double proposed = std::clamp(rho * ratio, 1e-6, 1e6);
        if (proposed > 5.0 * rho || proposed < 0.2 * rho) {
          rho = proposed;
          set_rho(rho);
          factor();
        }
      }
    }
    throw Error(ErrorCode::kMaxIterations,
                fmt::format("no KKT point within {} iterations (n={}, pairs={})", settings_.max_iterations, n_,
                            problem_.pairs.size()));
  }

 private:
  void set_rho(double rho) {
    rho_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) rho_[i] = con_.is_equality(i) ? 1e3 * rho : rho;
  }

  void factor() {
    SpMat k = p_ + con_.at * rho_.asDiagonal() * con_.a;
    SpMat shift(n_, n_);
    shift.setIdentity();
    k += settings_.sigma * shift;
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) {
      throw Error(ErrorCode::kInvalidArgument, "quadratic term is not positive definite");
    }
  }

  // Equality-constrained solve on the active set suggested by (z, y), then a
  // primal-dual active-set correction until signs and feasibility agree.
  PolishResult polish(const Vec& z, const Vec& y) {
    std::vector<Side> side(m_, Side::kInactive);
    for (std::size_t i = 0; i < m_; ++i) {
      if (con_.is_equality(i)) {
        side[i] = Side::kEquality;
      } else if (z[i] - con_.lower[i] < -y[i]) {
        side[i] = Side::kLower;
      } else if (con_.upper[i] - z[i] < y[i]) {
        side[i] = Side::kUpper;
      }
    }

    const double feas_tol = settings_.feasibility_tolerance;
    for (int round = 0; round < settings_.polish_rounds; ++round) {
      auto solved = solve_active(side);
      if (!solved) return {};
      auto& [x, w] = *solved;

      const double sign_tol = 1e-9 * std::max(1.0, inf_norm(w));
      bool changed = false;
      const Vec ax = con_.a * x;
      for (std::size_t i = 0; i < m_; ++i) {
        switch (side[i]) {
          case Side::kLower:
            if (w[i] > sign_tol) {
              side[i] = Side::kInactive;
              changed = true;
            }
            break;
          case Side::kUpper:
            if (w[i] < -sign_tol) {
              side[i] = Side::kInactive;
              changed = true;
            }
            break;
          case Side::kInactive:
            if (ax[i] < con_.lower[i] - 0.1 * feas_tol) {
              side[i] = Side::kLower;
              changed = true;
            } else if (ax[i] > con_.upper[i] + 0.1 * feas_tol) {
              side[i] = Side::kUpper;
              changed = true;
            }
            break;
          case Side::kEquality:
            break;
        }
      }
      if (!changed) return {true, std::move(x), std::move(w)};
    }
    return {};
  }

  // Solves [P A_s'; A_s 0] [x; w] = [-q; b_s] by regularized LDL' with
  // iterative refinement against the unregularized system.
  std::optional<std::pair<Vec, Vec>> solve_active(const std::vector<Side>& side) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < m_; ++i) {
      if (side[i] != Side::kInactive) rows.push_back(i);
    }
    const std::size_t s = rows.size();
    const std::size_t dim = n_ + s;
    constexpr double delta = 1e-9;

    std::vector<Triplet> exact_t;
    exact_t.reserve(p_.nonZeros() + 4 * s);
    for (int col = 0; col < p_.outerSize(); ++col) {
      for (SpMat::InnerIterator it(p_, col); it; ++it) exact_t.emplace_back(it.row(), it.col(), it.value());
    }
    Vec rhs(dim);
    rhs.head(n_) = -q_;
    for (std::size_t j = 0; j < s; ++j) {
      const std::size_t row = rows[j];
      for (SpMat::InnerIterator it(con_.at, row); it; ++it) {
        exact_t.emplace_back(n_ + j, it.row(), it.value());
        exact_t.emplace_back(it.row(), n_ + j, it.value());
      }
      rhs[n_ + j] = side[row] == Side::kUpper ? con_.upper[row] : con_.lower[row];
    }
    SpMat exact(dim, dim);
    exact.setFromTriplets(exact_t.begin(), exact_t.end());

    std::vector<Triplet> reg_t = exact_t;
    for (std::size_t i = 0; i < n_; ++i) reg_t.emplace_back(i, i, delta);
    for (std::size_t j = 0; j < s; ++j) reg_t.emplace_back(n_ + j, n_ + j, -delta);
    SpMat regularized(dim, dim);
    regularized.setFromTriplets(reg_t.begin(), reg_t.end());

    Eigen::SimplicialLDLT<SpMat> ldlt(regularized);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    Vec sol = ldlt.solve(rhs);
    for (int refine = 0; refine < 25; ++refine) {
      const Vec r = rhs - exact * sol;
      if (inf_norm(r) <= 1e-14 * std::max(1.0, inf_norm(rhs))) break;
      sol += ldlt.solve(r);
    }
    if (!sol.allFinite()) return std::nullopt;

    Vec w = Vec::Zero(m_);
    for (std::size_t j = 0; j < s; ++j) w[rows[j]] = sol[n_ + j];
    return std::make_pair(Vec(sol.head(n_)), std::move(w));
  }

  std::optional<Solution> finish(const PolishResult& polished, int iterations) {
    Solution out;
    out.values = polished.x;
    out.iterations = iterations;
    out.objective_value = problem_.objective(out.values);

    const Vec y = polished.y / cost_scale_;
    out.multipliers = Vec::Zero(2 * n_ + problem_.pairs.size());
    for (std::size_t i = 0; i < n_; ++i) {
      out.multipliers[i] = std::max(0.0, -y[i]);
      out.multipliers[n_ + i] = std::max(0.0, y[i]);
    }
    for (std::size_t k = 0; k < problem_.pairs.size(); ++k) out.multipliers[2 * n_ + k] = std::max(0.0, -y[n_ + k]);

    const Vec qx = problem_.quadratic * out.values;
    const Vec aty = con_.at * y;
    const Vec r = qx + problem_.linear + aty;
    const double scale = std::max({1.0, inf_norm(qx), inf_norm(problem_.linear), inf_norm(aty)});
    out.residuals.stationarity = inf_norm(r) / scale;
    out.residuals.primal_infeasibility = problem_.max_violation(out.values);

    if (out.residuals.primal_infeasibility > settings_.feasibility_tolerance ||
        out.residuals.stationarity > settings_.optimality_tolerance) {
      return std::nullopt;
    }
    return out;
  }

  const QPProblem& problem_;
  const SolverSettings& settings_;
  Constraints con_;
  std::size_t n_;
  std::size_t m_;
  double cost_scale_ = 1.0;
  SpMat p_;
  Vec q_;
  Vec rho_;
  Eigen::SimplicialLLT<SpMat> llt_;
};

void check_settings(const SolverSettings& s) {
  if (!(s.feasibility_tolerance > 0) || !(s.optimality_tolerance > 0) || s.max_iterations <= 0) {
    throw Error(ErrorCode::kInvalidArgument, "solver tolerances and iteration cap must be positive");
  }
}

}  // namespace

double QPProblem::objective(const Eigen::VectorXd& y) const {
  return 0.5 * y.dot(quadratic * y) + linear.dot(y);
}

double QPProblem::max_violation(const Eigen::VectorXd& y) const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    worst = std::max({worst, lower[i] - y[i], y[i] - upper[i]});
  }
  for (const auto& pc : pairs) worst = std::max(worst, pc.gap - (y[pc.upper] - y[pc.lower]));
  return worst;
}

void QPProblem::check_shape() const {
  const auto n = static_cast<Eigen::Index>(size());
  if (quadratic.rows() != n || quadratic.cols() != n || lower.size() != n || upper.size() != n) {
    throw Error(ErrorCode::kInvalidArgument, "QP dimensions disagree");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(lower[i] <= upper[i])) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("box {} has lower > upper", i));
    }
  }
  for (const auto& pc : pairs) {
    if (pc.upper >= size() || pc.lower >= size()) {
      throw Error(ErrorCode::kInvalidArgument, "pair constraint index out of range");
    }
  }
}

FeasibilityReport check_feasibility(const QPProblem& problem) {
  problem.check_shape();
  const std::size_t n = problem.size();
  FeasibilityReport report;
  report.tightened_lower = problem.lower;
  report.tightened_upper = problem.upper;

  // Edges point from the lower variable to the upper one: lower bounds flow
  // along them, upper bounds flow against them.
  std::vector<std::vector<std::size_t>> out_edges(n);
  std::vector<std::size_t> indegree(n, 0);
  for (std::size_t k = 0; k < problem.pairs.size(); ++k) {
    const auto& pc = problem.pairs[k];
    out_edges[pc.lower].push_back(k);
    ++indegree[pc.upper];
  }

  std::vector<std::size_t> order;
  order.reserve(n);
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const std::size_t v = ready.front();
    ready.pop_front();
    order.push_back(v);
    for (std::size_t k : out_edges[v]) {
      if (--indegree[problem.pairs[k].upper] == 0) ready.push_back(problem.pairs[k].upper);
    }
  }

  std::vector<std::size_t> pred(n, n);
  auto& lo = report.tightened_lower;
  auto& hi = report.tightened_upper;

  if (order.size() == n) {
    for (std::size_t v : order) {
      for (std::size_t k : out_edges[v]) {
        const auto& pc = problem.pairs[k];
        if (lo[v] + pc.gap > lo[pc.upper]) {
          lo[pc.upper] = lo[v] + pc.gap;
          pred[pc.upper] = v;
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      for (std::size_t k : out_edges[*it]) {
        const auto& pc = problem.pairs[k];
        hi[*it] = std::min(hi[*it], hi[pc.upper] - pc.gap);
      }
    }
  } else {
    // Cyclic graph: Bellman-Ford longest paths from a virtual source. Still
    // relaxing after n rounds means a cycle of positive total gap.
    std::vector<double> dist(n, 0.0);
    for (std::size_t round = 0; round <= n; ++round) {
      bool relaxed = false;
      for (const auto& pc : problem.pairs) {
        if (dist[pc.lower] + pc.gap > dist[pc.upper] + 1e-12) {
          dist[pc.upper] = dist[pc.lower] + pc.gap;
          relaxed = true;
        }
      }
      if (!relaxed) break;
      if (round == n) throw Error(ErrorCode::kCycle, "pair constraints contain a cycle with positive total gap");
    }
    for (std::size_t round = 0; round < n; ++round) {
      bool relaxed = false;
      for (const auto& pc : problem.pairs) {
        if (lo[pc.lower] + pc.gap > lo[pc.upper] + 1e-12) {
          lo[pc.upper] = lo[pc.lower] + pc.gap;
          pred[pc.upper] = pc.lower;
          relaxed = true;
        }
        if (hi[pc.upper] - pc.gap < hi[pc.lower] - 1e-12) {
          hi[pc.lower] = hi[pc.upper] - pc.gap;
          relaxed = true;
        }
      }
      if (!relaxed) break;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (lo[i] > problem.upper[i] + 1e-9 * std::max(1.0, std::abs(problem.upper[i]))) {
      report.feasible = false;
      std::vector<std::size_t> chain{i};
      while (pred[chain.back()] != n && chain.size() <= n) chain.push_back(pred[chain.back()]);
      std::reverse(chain.begin(), chain.end());
      report.witness = std::move(chain);
      break;
    }
  }
  return report;
}

Solution solve(const QPProblem& problem, const SolverSettings& settings) {
  Eigen::VectorXd start = 0.5 * (problem.lower + problem.upper);
  for (Eigen::Index i = 0; i < start.size(); ++i) {
    if (!std::isfinite(start[i])) start[i] = std::isfinite(problem.lower[i]) ? problem.lower[i]
                                             : std::isfinite(problem.upper[i]) ? problem.upper[i]
                                                                               : 0.0;
  }
  return solve(problem, settings, start);
}

Solution solve(const QPProblem& problem, const SolverSettings& settings, const Eigen::VectorXd& start) {
  check_settings(settings);
  const auto feasibility = check_feasibility(problem);
  if (!feasibility.feasible) {
    throw Error(ErrorCode::kInfeasible,
                fmt::format("pair gaps along chain [{}] exceed the box of the last variable",
                            fmt::join(feasibility.witness, " < ")));
  }
  if (start.size() != static_cast<Eigen::Index>(problem.size())) {
    throw Error(ErrorCode::kInvalidArgument, "start point has wrong dimension");
  }
  if (problem.size() == 0) return {};
  AdmmSolver solver(problem, settings);
  return solver.run(start);
}

}  // namespace dequant
