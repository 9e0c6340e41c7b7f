#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "covert/error.hpp"
#include "covert/optim.hpp"

namespace covert::optim {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr int kMaxNewtonIterations = 200;
constexpr double kArmijo = 1e-4;
constexpr int kStagnationLimit = 5;
constexpr int kMaxPolishRounds = 20;

}  // namespace

Projector::Projector(const LinearConstraints& constraints)
    : constraints_(remove_redundant_rows(constraints)),
      multipliers_(VectorXd::Zero(constraints_.rows())),
      scaled_multipliers_(VectorXd::Zero(constraints_.rows())),
      tol_(1e-12 * std::max(1.0, constraints_.eq_rhs.size() > 0
                                     ? constraints_.eq_rhs.lpNorm<Eigen::Infinity>()
                                     : 0.0)),
      accept_tol_(1e-10 * std::max(1.0, constraints_.eq_rhs.size() > 0
                                             ? constraints_.eq_rhs.lpNorm<Eigen::Infinity>()
                                             : 0.0)),
      a_norm_(constraints_.rows() > 0 ? constraints_.eq_matrix.cwiseAbs().rowwise().sum().maxCoeff() : 0.0) {}

VectorXd Projector::operator()(const VectorXd& z) { return project(z, nullptr, multipliers_); }

VectorXd Projector::operator()(const VectorXd& z, const VectorXd& metric) {
  if (metric.size() != z.size() || !(metric.minCoeff() > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "projection metric must be positive and match the point");
  }
  return project(z, &metric, scaled_multipliers_);
}

VectorXd Projector::project(const VectorXd& z, const VectorXd* metric, VectorXd& multipliers) const {
  const MatrixXd& a = constraints_.eq_matrix;
  const VectorXd& b = constraints_.eq_rhs;
  const VectorXd& lower = constraints_.lower_bounds;
  if (z.size() != constraints_.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "projection point has the wrong length");
  }
  if (a.rows() == 0) return z.cwiseMax(lower);
  const VectorXd d = metric ? *metric : VectorXd::Ones(z.size());

  // Dual function theta(lambda) = 1/2 |y - z|^2_{D^-1} - lambda^T (A y - b)
  // with y(lambda) = max(l, z + D A^T lambda); concave, gradient b - A y.
  VectorXd w(z.size());
  VectorXd y(z.size());
  auto dual_value = [&](const VectorXd& lambda) {
    w.noalias() = z + d.cwiseProduct(a.transpose() * lambda);
    y = w.cwiseMax(lower);
    return 0.5 * (y - z).cwiseAbs2().cwiseQuotient(d).sum() - lambda.dot(a * y - b);
  };

  // Rounding in z + D A^T lambda limits how well A y = b can be met.
  const double tol = tol_ + 1e-15 * a_norm_ * std::max(1.0, z.lpNorm<Eigen::Infinity>());
  VectorXd lambda = multipliers;
  double theta = dual_value(lambda);
  double last_norm = std::numeric_limits<double>::infinity();
  int stagnant = 0;
  for (int it = 0; it < kMaxNewtonIterations; ++it) {
    const VectorXd residual = a * y - b;
    const double norm = residual.lpNorm<Eigen::Infinity>();
    if (norm <= tol) {
      multipliers = lambda;
      return y;
    }
    stagnant = norm > 0.5 * last_norm ? stagnant + 1 : 0;
    last_norm = std::min(last_norm, norm);
    if (stagnant >= kStagnationLimit) {
      if (norm <= accept_tol_) break;
      if (polish(z, d, lambda, y)) {
        multipliers = lambda;
        return y;
      }
      theta = dual_value(lambda);
      stagnant = 0;
    }
    const VectorXd active = (w.array() > lower.array()).cast<double>().cwiseProduct(d.array()).matrix();
    MatrixXd h = a * active.asDiagonal() * a.transpose();
    const double ridge = 1e-12 * std::max(1.0, h.diagonal().maxCoeff());
    h.diagonal().array() += ridge;
    const VectorXd step = h.ldlt().solve(-residual);
    const double slope = -residual.dot(step);

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const VectorXd trial = lambda + t * step;
      const double theta_trial = dual_value(trial);
      if (theta_trial >= theta + kArmijo * t * slope) {
        lambda = trial;
        theta = theta_trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      theta = dual_value(lambda);  // restore w, y for lambda
      break;
    }
  }

  if ((a * y - b).lpNorm<Eigen::Infinity>() <= accept_tol_ || polish(z, d, lambda, y)) {
    multipliers = lambda;
    return y;
  }
  multipliers.setZero();
  // Either the set is empty (dual unbounded) or Newton stalled.
  LpProblem feasibility{VectorXd::Zero(z.size()), constraints_};
  lp_solve(feasibility);  // throws Infeasible for an empty set
  throw Error(ErrorCode::SolverStall, "projection did not reach the equality tolerance");
}

// Newton can cycle when entries sit on the kink of max(l, .). Fix the
// active set, solve the equality system exactly on the free entries and
// move any free entry that lands below its bound onto the bound.
bool Projector::polish(const VectorXd& z, const VectorXd& d, VectorXd& lambda, VectorXd& y) const {
  const MatrixXd& a = constraints_.eq_matrix;
  const VectorXd& b = constraints_.eq_rhs;
  const VectorXd& lower = constraints_.lower_bounds;
  std::vector<bool> free(static_cast<std::size_t>(z.size()));
  const VectorXd w = z + d.cwiseProduct(a.transpose() * lambda);
  for (Index i = 0; i < z.size(); ++i) free[static_cast<std::size_t>(i)] = w(i) > lower(i);

  for (int round = 0; round < kMaxPolishRounds; ++round) {
    VectorXd base = lower;
    VectorXd weight = VectorXd::Zero(z.size());
    for (Index i = 0; i < z.size(); ++i) {
      if (!free[static_cast<std::size_t>(i)]) continue;
      base(i) = z(i);
      weight(i) = d(i);
    }
    MatrixXd h = a * weight.asDiagonal() * a.transpose();
    h.diagonal().array() += 1e-14 * std::max(1.0, h.diagonal().maxCoeff());
    const VectorXd mult = h.ldlt().solve(b - a * base);
    const VectorXd candidate = base + weight.cwiseProduct(a.transpose() * mult);

    bool moved = false;
    for (Index i = 0; i < z.size(); ++i) {
      if (free[static_cast<std::size_t>(i)] && candidate(i) < lower(i)) {
        free[static_cast<std::size_t>(i)] = false;
        moved = true;
      }
    }
    if (moved) continue;
    if ((a * candidate - b).lpNorm<Eigen::Infinity>() > accept_tol_) return false;
    lambda = mult;
    y = candidate;
    return true;
  }
  return false;
}

VectorXd project_to_affine_nonneg(const VectorXd& x, const LinearConstraints& feasible_set) {
  Projector projector(feasible_set);
  return projector(x);
}

}  // namespace covert::optim
