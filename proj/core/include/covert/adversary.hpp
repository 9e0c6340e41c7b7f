#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "covert/mdp.hpp"
#include "covert/rng.hpp"

namespace covert::adversary {

/// Observed state-action pairs y_0..y_N (N + 1 of each).
struct TrajectorySample {
  std::vector<Index> states;
  std::vector<Index> actions;
  Index n_steps = 0;
  std::uint64_t seed = 0;
};

/// u_k ~ mu(.|x_k), x_{k+1} ~ P[x_k][u_k][.], starting from x0.
/// Throws InvalidArgument for an out-of-range x0 or mismatched policy.
TrajectorySample sample_trajectory(const TransitionTensor& transition, const Policy& policy, Index n_steps,
                                   std::uint64_t seed, Index x0);
TrajectorySample sample_trajectory(const MdpModel& model, const Policy& policy, Index n_steps, std::uint64_t seed,
                                   Index x0);

/// Inverse-CDF draw from a probability vector with one uniform from `rng`.
Index draw_index(const Eigen::VectorXd& distribution, Rng& rng);

/// Start state drawn from the stationary distribution of the state chain
/// induced by `policy`.
Index draw_stationary_state(const TransitionTensor& transition, const Policy& policy, Rng& rng);

/// Closed-form maximiser of the trajectory log-likelihood: empirical
/// transition frequencies between state-action pairs.
struct AdversaryEstimate {
  Index n_states = 0;
  Index n_actions = 0;
  /// Pair-to-pair frequencies; rows with no visits are all zero.
  Eigen::MatrixXd a_hat;
  /// Transition counts N_mn.
  Eigen::MatrixXd visit_counts;
  /// Row m has at least one outgoing transition.
  std::vector<bool> visited;
  Index sample_size = 0;
};

/// Throws EmptySample when the trajectory has no transitions and
/// InvalidArgument for out-of-range indices.
AdversaryEstimate mle_estimate(const TrajectorySample& sample, Index n_states, Index n_actions);

enum class UnvisitedRows { Flag, Reject };

struct ExtractedEstimates {
  /// P_hat[i][u][j] = sum_u' a_hat[iu][ju']; unvisited rows are zero.
  TransitionTensor p_hat;
  /// Pooled column ratios: mu_hat(u'|j) = sum_m N_m,ju' / sum_m,u'' N_m,ju''.
  /// States never entered have zero rows.
  Eigen::MatrixXd policy_hat;
  std::vector<bool> visited_rows;
  std::vector<bool> visited_states;
};

/// Throws UnvisitedRow under UnvisitedRows::Reject when any state-action
/// row was never left.
ExtractedEstimates extract_estimates(const AdversaryEstimate& estimate, UnvisitedRows mode = UnvisitedRows::Flag);

struct TvError {
  /// sum over rows of 1/2 sum_j |p_hat - p_true|
  double tv = 0.0;
  /// plain l1 sum, 2 * tv
  double l1 = 0.0;
  Index rows_used = 0;
};

/// Summed total-variation error over (i, u) rows. When `rows` is given,
/// only rows flagged true enter the sum. Throws DimensionMismatch.
TvError tv_error(const TransitionTensor& p_hat, const TransitionTensor& p_true, const std::vector<bool>* rows = nullptr);

struct CrbReport {
  Index n_steps = 0;
  int n_runs = 0;
  /// Free parameters: first S-1 entries of every chain row, row-major.
  Index n_params = 0;
  /// True chain parameters and the run-average of the estimates.
  Eigen::VectorXd truth;
  Eigen::VectorXd mean_estimate;
  /// N times the empirical covariance of the estimates across runs.
  Eigen::MatrixXd scaled_covariance;
  /// Inverse of the assembled Fisher information.
  Eigen::MatrixXd crb;
  /// Smallest eigenvalue of scaled_covariance - crb.
  double min_eigenvalue = 0.0;
  /// Monte Carlo allowance 3 |crb|_2 sqrt(2 / (runs - 1)).
  double tolerance = 0.0;
  /// N Var / CRB diagonal per parameter.
  Eigen::VectorXd variance_ratios;
  bool dominated = false;
};

/// Empirical check of the Cramer-Rao bound for the pair chain induced by
/// (transition, policy). Run r uses the stream (seed, r) and starts from a
/// state drawn from the stationary distribution. Throws InvalidArgument
/// for a policy with zero entries and UnvisitedRow if a run misses a row.
CrbReport crb_check(const TransitionTensor& transition, const Policy& policy, Index n_steps, int n_runs,
                    std::uint64_t seed);
CrbReport crb_check(const MdpModel& model, const Policy& policy, Index n_steps, int n_runs, std::uint64_t seed);

}  // namespace covert::adversary
