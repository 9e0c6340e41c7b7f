#pragma once

#include <vector>

#include <Eigen/Dense>

#include "covert/mdp.hpp"

namespace covert {

/// Row-stochastic chain over state-action pairs. Pair (i, u) has index
/// m = i * n_actions + u. Chains built by augment() remember the MDP shape;
/// chains built from a bare matrix use n_states = S, n_actions = 1.
class AugmentedChain {
 public:
  /// Throws InvalidArgument unless `a` is square with rows summing to 1
  /// within 1e-12 and non-negative entries.
  explicit AugmentedChain(Eigen::MatrixXd a);
  AugmentedChain(Eigen::MatrixXd a, Index n_states, Index n_actions);

  Index size() const { return a_.rows(); }
  Index n_states() const { return n_states_; }
  Index n_actions() const { return n_actions_; }
  const Eigen::MatrixXd& matrix() const { return a_; }
  double operator()(Index m, Index n) const { return a_(m, n); }

 private:
  Eigen::MatrixXd a_;
  Index n_states_;
  Index n_actions_;
};

/// A[iu][ju'] = mu(u'|j) P[i][u][j] with mu = pi / state marginals.
/// Throws ZeroStateMass if a state carries no mass.
AugmentedChain augment(const TransitionTensor& transition, const OccupationMeasure& pi);
AugmentedChain augment(const MdpModel& model, const OccupationMeasure& pi);

/// Stationary distribution of the chain. Throws NotIrreducible.
Eigen::VectorXd stationary_distribution(const AugmentedChain& chain);

struct FisherReport {
  double log_det_paper = 0.0;
  double log_det_oracle = 0.0;
  Eigen::VectorXd stationary;
  /// |X| |U|^2 sum_j log sum_u pi(j,u)
  double marginal_term = 0.0;
  /// |U| sum_{i,u,j} log P[i][u][j]
  double transition_term = 0.0;
};

/// Closed-form log-determinant: marginal_term - transition_term.
/// Throws NonPositiveEntry for a marginal or transition entry below 1e-300.
double log_det_fim_paper(const OccupationMeasure& pi, const TransitionTensor& transition);
double log_det_fim_paper(const OccupationMeasure& pi, const MdpModel& model);

/// Block-diagonal Fisher information of the free chain parameters: row m
/// of the chain contributes the block over its first S-1 entries (the last
/// entry of each row is the dependent one),
///   block_m = a_m (diag(1 / a_mn) + (1 / a_mS) 1 1^T).
struct BlockDiagonalFim {
  std::vector<Eigen::MatrixXd> blocks;

  Index dimension() const;
  Eigen::MatrixXd dense() const;
};

/// Throws NonPositiveEntry if a chain entry or stationary mass is below 1e-300.
BlockDiagonalFim assemble_fim(const AugmentedChain& chain);
BlockDiagonalFim assemble_fim(const AugmentedChain& chain, const Eigen::VectorXd& stationary);

/// log det of assemble_fim(chain):
///   sum_m [(S-1) log a_m - sum_n log a_mn]
/// with a the chain's own stationary distribution. A 1x1 chain has an empty
/// matrix and returns 0.
double log_det_fim_oracle(const AugmentedChain& chain);
double log_det_fim_oracle(const AugmentedChain& chain, const Eigen::VectorXd& stationary);

/// Minus the central-difference Hessian of the expected per-step
/// log-likelihood  sum_m a_m sum_n a*_mn log a_mn(theta)  at theta = a*,
/// with theta the first S-1 entries of each row and a_m held fixed.
/// Parameters ordered row-major: (m, n) -> m * (S-1) + n.
/// Throws StepTooLarge unless 1e-6 <= h <= 1e-3 and every entry >= 10 h.
Eigen::MatrixXd fim_finite_difference_oracle(const AugmentedChain& chain, double h);

FisherReport fisher_report(const MdpModel& model, const OccupationMeasure& pi);
FisherReport fisher_report(const TransitionTensor& transition, const OccupationMeasure& pi);

}  // namespace covert
