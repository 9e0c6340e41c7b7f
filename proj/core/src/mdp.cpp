#include "covert/mdp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "covert/error.hpp"
#include "covert/markov.hpp"

namespace covert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

TransitionTensor::TransitionTensor(Index n_states, Index n_actions)
    : n_states_(n_states),
      n_actions_(n_actions),
      data_(static_cast<std::size_t>(n_states * n_actions * n_states), 0.0) {
  if (n_states <= 0 || n_actions <= 0) {
    throw Error(ErrorCode::InvalidModel, "n_states and n_actions must be positive");
  }
}

MatrixXd TransitionTensor::state_chain(const MatrixXd& mu) const {
  if (mu.rows() != n_states_ || mu.cols() != n_actions_) {
    throw Error(ErrorCode::DimensionMismatch, "policy shape differs from the transition tensor");
  }
  MatrixXd chain = MatrixXd::Zero(n_states_, n_states_);
  for (Index i = 0; i < n_states_; ++i) {
    for (Index u = 0; u < n_actions_; ++u) chain.row(i) += mu(i, u) * row(i, u).transpose();
  }
  return chain;
}

void validate_transition(const TransitionTensor& transition) {
  for (Index i = 0; i < transition.n_states(); ++i) {
    for (Index u = 0; u < transition.n_actions(); ++u) {
      const auto r = transition.row(i, u);
      for (Index j = 0; j < transition.n_states(); ++j) {
        if (!(r(j) > 0.0) || !std::isfinite(r(j))) {
          std::ostringstream msg;
          msg << "transition entry P[" << i << "][" << u << "][" << j << "] = " << r(j)
              << " violates strict positivity";
          throw Error(ErrorCode::InvalidModel, msg.str());
        }
      }
      if (std::abs(r.sum() - 1.0) > 1e-12) {
        std::ostringstream msg;
        msg << "transition row (" << i << ", " << u << ") sums to " << r.sum() << ", not 1";
        throw Error(ErrorCode::InvalidModel, msg.str());
      }
    }
  }
}

MdpModel::MdpModel(TransitionTensor transition, MatrixXd cost)
    : transition_(std::move(transition)), cost_(std::move(cost)) {
  if (transition_.n_states() <= 0 || transition_.n_actions() <= 0) {
    throw Error(ErrorCode::InvalidModel, "model needs at least one state and one action");
  }
  if (cost_.rows() != transition_.n_states() || cost_.cols() != transition_.n_actions()) {
    throw Error(ErrorCode::InvalidModel, "cost matrix shape differs from n_states x n_actions");
  }
  validate_transition(transition_);
  for (Index i = 0; i < cost_.rows(); ++i) {
    for (Index u = 0; u < cost_.cols(); ++u) {
      if (!std::isfinite(cost_(i, u)) || cost_(i, u) < 0.0) {
        std::ostringstream msg;
        msg << "cost c[" << i << "][" << u << "] = " << cost_(i, u) << " must be finite and non-negative";
        throw Error(ErrorCode::InvalidModel, msg.str());
      }
    }
  }
}

VectorXd MdpModel::cost_flat() const {
  VectorXd flat(n_pairs());
  for (Index i = 0; i < n_states(); ++i) {
    for (Index u = 0; u < n_actions(); ++u) flat(i * n_actions() + u) = cost_(i, u);
  }
  return flat;
}

OccupationMeasure::OccupationMeasure(Index n_states, Index n_actions, VectorXd flat)
    : n_states_(n_states), n_actions_(n_actions), flat_(std::move(flat)) {
  if (flat_.size() != n_states * n_actions) {
    throw Error(ErrorCode::DimensionMismatch, "occupation vector length differs from n_states * n_actions");
  }
}

VectorXd OccupationMeasure::state_marginals() const {
  VectorXd d(n_states_);
  for (Index i = 0; i < n_states_; ++i) d(i) = flat_.segment(i * n_actions_, n_actions_).sum();
  return d;
}

MatrixXd OccupationMeasure::as_matrix() const {
  MatrixXd m(n_states_, n_actions_);
  for (Index i = 0; i < n_states_; ++i) {
    for (Index u = 0; u < n_actions_; ++u) m(i, u) = (*this)(i, u);
  }
  return m;
}

double flow_residual(const OccupationMeasure& pi, const TransitionTensor& transition) {
  if (pi.n_states() != transition.n_states() || pi.n_actions() != transition.n_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "occupation measure and transition tensor disagree in shape");
  }
  VectorXd inflow = VectorXd::Zero(pi.n_states());
  for (Index i = 0; i < pi.n_states(); ++i) {
    for (Index u = 0; u < pi.n_actions(); ++u) inflow += pi(i, u) * transition.row(i, u);
  }
  return (pi.state_marginals() - inflow).lpNorm<Eigen::Infinity>();
}

void check_occupation(const OccupationMeasure& pi, const TransitionTensor& transition, double tol) {
  if (pi.flat().minCoeff() < -tol) throw Error(ErrorCode::InvalidArgument, "occupation measure has a negative entry");
  if (std::abs(pi.flat().sum() - 1.0) > tol) {
    throw Error(ErrorCode::InvalidArgument, "occupation measure does not sum to one");
  }
  const double residual = flow_residual(pi, transition);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "flow balance violated by " << residual;
    throw Error(ErrorCode::InvalidArgument, msg.str());
  }
}

Policy::Policy(MatrixXd mu) : mu_(std::move(mu)) {
  for (Index i = 0; i < mu_.rows(); ++i) {
    if (mu_.row(i).minCoeff() < 0.0 || std::abs(mu_.row(i).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "policy row " + std::to_string(i) + " is not a distribution");
    }
  }
}

optim::LinearConstraints flow_constraints(const TransitionTensor& transition, double floor) {
  const Index n = transition.n_states();
  const Index m = transition.n_actions();
  optim::LinearConstraints c;
  c.eq_matrix = MatrixXd::Zero(n, n * m);
  c.eq_rhs = VectorXd::Zero(n);
  for (Index j = 0; j + 1 < n; ++j) {
    for (Index u = 0; u < m; ++u) c.eq_matrix(j, j * m + u) += 1.0;
    for (Index i = 0; i < n; ++i) {
      for (Index u = 0; u < m; ++u) c.eq_matrix(j, i * m + u) -= transition(i, u, j);
    }
  }
  c.eq_matrix.row(n - 1).setOnes();
  c.eq_rhs(n - 1) = 1.0;
  c.lower_bounds = VectorXd::Constant(n * m, floor);
  return c;
}

OccupationMeasure solve_average_cost_lp(const MdpModel& model) {
  optim::LpProblem problem{model.cost_flat(), flow_constraints(model.transition())};
  try {
    VectorXd x = optim::lp_solve(problem);
    x /= x.sum();
    return OccupationMeasure(model.n_states(), model.n_actions(), std::move(x));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible || e.code() == ErrorCode::Unbounded) {
      throw Error(ErrorCode::InfeasibleLp, e.what());
    }
    throw;
  }
}

Policy extract_policy(const OccupationMeasure& pi) {
  const VectorXd marginals = pi.state_marginals();
  MatrixXd mu(pi.n_states(), pi.n_actions());
  for (Index i = 0; i < pi.n_states(); ++i) {
    if (!(marginals(i) > 0.0)) {
      throw Error(ErrorCode::ZeroStateMass, "state " + std::to_string(i) + " has zero occupation mass");
    }
    for (Index u = 0; u < pi.n_actions(); ++u) mu(i, u) = std::max(pi(i, u), 0.0);
    mu.row(i) /= mu.row(i).sum();
  }
  return Policy(std::move(mu));
}

double average_cost(const OccupationMeasure& pi, const MatrixXd& cost) {
  if (cost.rows() != pi.n_states() || cost.cols() != pi.n_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "cost matrix shape differs from the occupation measure");
  }
  double total = 0.0;
  for (Index i = 0; i < pi.n_states(); ++i) {
    for (Index u = 0; u < pi.n_actions(); ++u) total += cost(i, u) * pi(i, u);
  }
  return total;
}

double average_cost(const OccupationMeasure& pi, const MdpModel& model) { return average_cost(pi, model.cost()); }

double relative_value_iteration(const MdpModel& model, double tol, int max_iterations) {
  const Index n = model.n_states();
  const Index m = model.n_actions();
  VectorXd h = VectorXd::Zero(n);
  VectorXd next(n);
  for (int it = 0; it < max_iterations; ++it) {
    for (Index i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Index u = 0; u < m; ++u) {
        best = std::min(best, model.cost()(i, u) + model.transition().row(i, u).dot(h));
      }
      next(i) = best;
    }
    const VectorXd diff = next - h;
    const double hi = diff.maxCoeff();
    const double lo = diff.minCoeff();
    if (hi - lo < tol) return 0.5 * (hi + lo);
    h = next.array() - next(0);
  }
  throw Error(ErrorCode::NoConvergence, "relative value iteration hit its iteration cap");
}

OccupationMeasure occupation_from_policy(const TransitionTensor& transition, const Policy& policy) {
  const VectorXd d = stationary_vector(transition.state_chain(policy.matrix()));
  VectorXd flat(transition.n_states() * transition.n_actions());
  for (Index i = 0; i < transition.n_states(); ++i) {
    for (Index u = 0; u < transition.n_actions(); ++u) flat(i * transition.n_actions() + u) = d(i) * policy(i, u);
  }
  return OccupationMeasure(transition.n_states(), transition.n_actions(), std::move(flat));
}

}  // namespace covert
