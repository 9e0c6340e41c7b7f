#include <algorithm>
#include <cmath>
#include <vector>

#include "covert/error.hpp"
#include "covert/optim.hpp"

namespace covert::optim {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void LinearConstraints::check_dimensions() const {
  if (eq_rhs.size() != eq_matrix.rows() || lower_bounds.size() != eq_matrix.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "linear constraints: matrix is " + std::to_string(eq_matrix.rows()) +
                                                  "x" + std::to_string(eq_matrix.cols()) + ", rhs has " +
                                                  std::to_string(eq_rhs.size()) + ", bounds have " +
                                                  std::to_string(lower_bounds.size()));
  }
}

double LinearConstraints::equality_residual(const VectorXd& x) const {
  if (eq_matrix.rows() == 0) return 0.0;
  return (eq_matrix * x - eq_rhs).lpNorm<Eigen::Infinity>();
}

LinearConstraints remove_redundant_rows(const LinearConstraints& constraints, double tol) {
  constraints.check_dimensions();
  const Index m = constraints.rows();
  if (m == 0) return constraints;

  Eigen::ColPivHouseholderQR<MatrixXd> qr(constraints.eq_matrix.transpose());
  qr.setThreshold(tol);
  const Index rank = qr.rank();
  if (rank == m) return constraints;

  std::vector<Index> keep(qr.colsPermutation().indices().data(),
                          qr.colsPermutation().indices().data() + rank);
  std::sort(keep.begin(), keep.end());

  LinearConstraints reduced;
  reduced.eq_matrix.resize(rank, constraints.dimension());
  reduced.eq_rhs.resize(rank);
  for (Index r = 0; r < rank; ++r) {
    reduced.eq_matrix.row(r) = constraints.eq_matrix.row(keep[static_cast<std::size_t>(r)]);
    reduced.eq_rhs(r) = constraints.eq_rhs(keep[static_cast<std::size_t>(r)]);
  }
  reduced.lower_bounds = constraints.lower_bounds;

  // Minimum-norm solution of the kept rows; dropped rows must agree with it.
  const MatrixXd gram = reduced.eq_matrix * reduced.eq_matrix.transpose();
  const VectorXd x = reduced.eq_matrix.transpose() * gram.ldlt().solve(reduced.eq_rhs);
  const double scale = std::max(1.0, constraints.eq_rhs.lpNorm<Eigen::Infinity>());
  if (constraints.equality_residual(x) > 1e-8 * scale) {
    throw Error(ErrorCode::Infeasible, "equality constraints are inconsistent");
  }
  return reduced;
}

namespace {

enum class SimplexOutcome { Optimal, Unbounded };

constexpr int kDegenerateStreak = 50;

// Revised simplex on  min cost^T y  s.t.  a y = rhs, y >= 0  starting from a
// feasible basis. Dantzig pricing (most negative reduced cost); after
// kDegenerateStreak degenerate pivots in a row it switches to Bland's rule
// (lowest index enters, leaving ties to the lowest basic index) until a
// pivot makes progress, which rules out cycling.
SimplexOutcome run_simplex(const MatrixXd& a, const VectorXd& rhs, const VectorXd& cost, std::vector<Index>& basis,
                           const LpOptions& options, int& iterations) {
  const Index m = a.rows();
  const Index n = a.cols();
  const double cost_scale = std::max(1.0, cost.lpNorm<Eigen::Infinity>());
  std::vector<bool> in_basis(static_cast<std::size_t>(n), false);
  for (Index j : basis) in_basis[static_cast<std::size_t>(j)] = true;

  MatrixXd b(m, m);
  int degenerate = 0;
  while (true) {
    if (++iterations > options.max_iterations) {
      throw Error(ErrorCode::SolverStall, "simplex iteration cap reached");
    }
    for (Index i = 0; i < m; ++i) b.col(i) = a.col(basis[static_cast<std::size_t>(i)]);
    const Eigen::PartialPivLU<MatrixXd> lu(b);
    const VectorXd xb = lu.solve(rhs);
    VectorXd cb(m);
    for (Index i = 0; i < m; ++i) cb(i) = cost(basis[static_cast<std::size_t>(i)]);
    const VectorXd y = lu.transpose().solve(cb);

    const bool bland = degenerate >= kDegenerateStreak;
    Index entering = -1;
    double most_negative = -options.optimality_tol * cost_scale;
    for (Index j = 0; j < n; ++j) {
      if (in_basis[static_cast<std::size_t>(j)]) continue;
      const double reduced = cost(j) - a.col(j).dot(y);
      if (reduced < most_negative) {
        entering = j;
        if (bland) break;
        most_negative = reduced;
      }
    }
    if (entering < 0) return SimplexOutcome::Optimal;

    const VectorXd dir = lu.solve(a.col(entering));
    Index leave = -1;
    double best = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (dir(i) <= options.pivot_tol) continue;
      const double ratio = std::max(xb(i), 0.0) / dir(i);
      if (leave < 0 || ratio < best - 1e-12 * (1.0 + best) ||
          (ratio <= best + 1e-12 * (1.0 + best) &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave < 0) return SimplexOutcome::Unbounded;
    degenerate = best * dir.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + xb.lpNorm<Eigen::Infinity>()) ? degenerate + 1 : 0;

    in_basis[static_cast<std::size_t>(basis[static_cast<std::size_t>(leave)])] = false;
    in_basis[static_cast<std::size_t>(entering)] = true;
    basis[static_cast<std::size_t>(leave)] = entering;
  }
}

VectorXd basic_values(const MatrixXd& a, const VectorXd& rhs, const std::vector<Index>& basis) {
  MatrixXd b(a.rows(), a.rows());
  for (Index i = 0; i < a.rows(); ++i) b.col(i) = a.col(basis[static_cast<std::size_t>(i)]);
  return b.partialPivLu().solve(rhs);
}

}  // namespace

VectorXd lp_solve(const LpProblem& problem, const LpOptions& options) {
  problem.constraints.check_dimensions();
  const Index n = problem.constraints.dimension();
  if (problem.objective.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "objective length differs from constraint columns");
  }
  const LinearConstraints reduced = remove_redundant_rows(problem.constraints);
  MatrixXd a = reduced.eq_matrix;
  VectorXd rhs = reduced.eq_rhs - a * reduced.lower_bounds;
  const Index m = a.rows();

  if (m == 0) {
    if ((problem.objective.array() < 0.0).any()) {
      throw Error(ErrorCode::Unbounded, "no equality rows and a negative cost coefficient");
    }
    return reduced.lower_bounds;
  }
  for (Index i = 0; i < m; ++i) {
    if (rhs(i) < 0.0) {
      rhs(i) = -rhs(i);
      a.row(i) *= -1.0;
    }
  }

  int iterations = 0;

  // Phase 1: artificial identity block.
  MatrixXd a1(m, n + m);
  a1 << a, MatrixXd::Identity(m, m);
  VectorXd c1 = VectorXd::Zero(n + m);
  c1.tail(m).setOnes();
  std::vector<Index> basis(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  run_simplex(a1, rhs, c1, basis, options, iterations);

  VectorXd xb = basic_values(a1, rhs, basis);
  double infeasibility = 0.0;
  for (Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] >= n) infeasibility += std::abs(xb(i));
  }
  if (infeasibility > options.feasibility_tol * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::Infeasible, "phase one ended with positive artificial mass");
  }

  // Pivot zero-level artificials out of the basis; rows where that is
  // impossible are redundant and get dropped.
  std::vector<Index> drop_rows;
  for (Index pos = 0; pos < m; ++pos) {
    if (basis[static_cast<std::size_t>(pos)] < n) continue;
    MatrixXd b(m, m);
    for (Index i = 0; i < m; ++i) b.col(i) = a1.col(basis[static_cast<std::size_t>(i)]);
    const VectorXd row_selector = b.partialPivLu().transpose().solve(VectorXd::Unit(m, pos));
    Index replacement = -1;
    for (Index j = 0; j < n; ++j) {
      if (std::find(basis.begin(), basis.end(), j) != basis.end()) continue;
      if (std::abs(row_selector.dot(a.col(j))) > options.pivot_tol) {
        replacement = j;
        break;
      }
    }
    if (replacement >= 0) {
      basis[static_cast<std::size_t>(pos)] = replacement;
    } else {
      drop_rows.push_back(pos);
    }
  }
  if (!drop_rows.empty()) {
    std::vector<Index> keep_rows;
    std::vector<Index> keep_basis;
    for (Index i = 0; i < m; ++i) {
      if (std::find(drop_rows.begin(), drop_rows.end(), i) == drop_rows.end()) {
        keep_rows.push_back(i);
        keep_basis.push_back(basis[static_cast<std::size_t>(i)]);
      }
    }
    MatrixXd a_kept(static_cast<Index>(keep_rows.size()), n);
    VectorXd rhs_kept(static_cast<Index>(keep_rows.size()));
    for (std::size_t r = 0; r < keep_rows.size(); ++r) {
      a_kept.row(static_cast<Index>(r)) = a.row(keep_rows[r]);
      rhs_kept(static_cast<Index>(r)) = rhs(keep_rows[r]);
    }
    a = std::move(a_kept);
    rhs = std::move(rhs_kept);
    basis = std::move(keep_basis);
  }

  // Phase 2.
  if (run_simplex(a, rhs, problem.objective, basis, options, iterations) == SimplexOutcome::Unbounded) {
    throw Error(ErrorCode::Unbounded, "objective decreases without bound on the feasible set");
  }
  xb = basic_values(a, rhs, basis);
  VectorXd x = reduced.lower_bounds;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    x(basis[i]) += std::max(xb(static_cast<Index>(i)), 0.0);
  }
  return x;
}

}  // namespace covert::optim
