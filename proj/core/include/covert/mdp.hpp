#pragma once

#include <vector>

#include <Eigen/Dense>

#include "covert/optim.hpp"

namespace covert {

using Eigen::Index;

/// Conditional transition probabilities P[i][u][j] stored with the row
/// (i, u) contiguous, so row (i, u) sits at flat offset (i * n_actions + u).
/// The same ordering indexes state-action pairs everywhere in the library.
class TransitionTensor {
 public:
  TransitionTensor() = default;
  TransitionTensor(Index n_states, Index n_actions);

  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }

  double operator()(Index i, Index u, Index j) const { return data_[offset(i, u) + j]; }
  double& operator()(Index i, Index u, Index j) { return data_[offset(i, u) + j]; }

  Eigen::Map<const Eigen::VectorXd> row(Index i, Index u) const {
    return {data_.data() + offset(i, u), n_states_};
  }
  Eigen::Map<Eigen::VectorXd> row(Index i, Index u) { return {data_.data() + offset(i, u), n_states_}; }

  /// All entries, length n_states * n_actions * n_states.
  Eigen::Map<const Eigen::VectorXd> flat() const { return {data_.data(), static_cast<Index>(data_.size())}; }
  Eigen::Map<Eigen::VectorXd> flat() { return {data_.data(), static_cast<Index>(data_.size())}; }

  /// State chain under a stationary policy: sum_u mu(u|i) P[i][u][j].
  Eigen::MatrixXd state_chain(const Eigen::MatrixXd& mu) const;

  bool operator==(const TransitionTensor&) const = default;

 private:
  std::size_t offset(Index i, Index u) const {
    return static_cast<std::size_t>((i * n_actions_ + u) * n_states_);
  }

  Index n_states_ = 0;
  Index n_actions_ = 0;
  std::vector<double> data_;
};

/// Finite MDP. The constructor enforces: rows of P sum to 1 within 1e-12,
/// every P entry is strictly positive, and every cost is finite and >= 0.
class MdpModel {
 public:
  MdpModel(TransitionTensor transition, Eigen::MatrixXd cost);

  Index n_states() const { return transition_.n_states(); }
  Index n_actions() const { return transition_.n_actions(); }
  Index n_pairs() const { return n_states() * n_actions(); }

  const TransitionTensor& transition() const { return transition_; }
  /// n_states x n_actions.
  const Eigen::MatrixXd& cost() const { return cost_; }
  /// Costs flattened in state-action order.
  Eigen::VectorXd cost_flat() const;

 private:
  TransitionTensor transition_;
  Eigen::MatrixXd cost_;
};

/// Throws Error(InvalidModel) naming the first violated invariant.
void validate_transition(const TransitionTensor& transition);

/// Long-run state-action frequencies pi(i, u), flattened in state-action
/// order. Holds only the numbers; which transition tensor it balances
/// against is checked explicitly with check_occupation().
class OccupationMeasure {
 public:
  OccupationMeasure(Index n_states, Index n_actions, Eigen::VectorXd flat);

  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }

  double operator()(Index i, Index u) const { return flat_(i * n_actions_ + u); }
  const Eigen::VectorXd& flat() const { return flat_; }

  /// sum_u pi(i, u) per state.
  Eigen::VectorXd state_marginals() const;
  /// n_states x n_actions view as a dense matrix.
  Eigen::MatrixXd as_matrix() const;

 private:
  Index n_states_;
  Index n_actions_;
  Eigen::VectorXd flat_;
};

/// max_j |sum_u pi(j,u) - sum_{i,u} P[i][u][j] pi(i,u)|.
double flow_residual(const OccupationMeasure& pi, const TransitionTensor& transition);

/// Throws InvalidArgument unless pi >= 0, sums to 1 and balances flow,
/// each within `tol`.
void check_occupation(const OccupationMeasure& pi, const TransitionTensor& transition, double tol = 1e-9);

/// Stationary policy mu(u | i); rows are distributions.
class Policy {
 public:
  explicit Policy(Eigen::MatrixXd mu);

  Index n_states() const { return mu_.rows(); }
  Index n_actions() const { return mu_.cols(); }
  double operator()(Index i, Index u) const { return mu_(i, u); }
  const Eigen::MatrixXd& matrix() const { return mu_; }

 private:
  Eigen::MatrixXd mu_;
};

/// Equality constraints of the occupation-measure polytope: flow balance
/// for states 0..n-2 (the last row is implied by the others together with
/// normalization) followed by sum pi = 1. Lower bounds are `floor`.
optim::LinearConstraints flow_constraints(const TransitionTensor& transition, double floor = 0.0);

/// Optimal occupation measure of the average-cost linear program.
/// Throws InfeasibleLp or SolverStall (neither occurs for valid models).
OccupationMeasure solve_average_cost_lp(const MdpModel& model);

/// mu(u|i) = pi(i,u) / sum_u pi(i,u). Throws ZeroStateMass for a state
/// with no mass.
Policy extract_policy(const OccupationMeasure& pi);

double average_cost(const OccupationMeasure& pi, const MdpModel& model);
double average_cost(const OccupationMeasure& pi, const Eigen::MatrixXd& cost);

/// Optimal gain of the average-cost problem by relative value iteration,
/// stopping when the span of successive differences drops below tol.
/// Throws NoConvergence after max_iterations sweeps.
double relative_value_iteration(const MdpModel& model, double tol = 1e-10, int max_iterations = 1000000);

/// Occupation measure induced by a stationary policy: state stationary
/// distribution times the policy.
OccupationMeasure occupation_from_policy(const TransitionTensor& transition, const Policy& policy);

}  // namespace covert
