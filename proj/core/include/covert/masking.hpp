#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covert/mdp.hpp"
#include "covert/optim.hpp"
#include "covert/rng.hpp"

namespace covert::masking {

enum class MaskingMethod { TotalCost, StateActionCost, Transition, MaxEntropy };

std::string to_string(MaskingMethod method);
/// Accepts "total", "cost", "transition", "entropy". Throws InvalidArgument.
MaskingMethod parse_method(const std::string& name);

struct MaskingConfig {
  /// Weight of the log state-marginal term (total-cost masking) or of the
  /// negative entropy (max-entropy masking).
  double gamma = 0.0;
  /// Weight of the cost or transition perturbation penalty.
  double gamma1 = 0.0;
  /// Weight of the log-determinant term in the two alternating schemes.
  double gamma2 = 0.0;
  /// Cost fall-off rate of the scenario the model came from (provenance only).
  double chi = 10.0;
  double bcd_threshold = 1e-10;
  int bcd_max_rounds = 200;
  int monte_carlo_runs = 200;
  /// Random starts per Monte Carlo run; the best objective is kept.
  int starts_per_run = 8;
  std::uint64_t master_seed = 0;
  /// Lower bound on every occupation entry during the nonlinear solves.
  double floor = 1e-9;
  double solver_tol = 1e-8;
  int solver_max_iters = 10000;

  /// Throws InvalidArgument on negative or non-finite multipliers and
  /// non-positive counts or tolerances.
  void validate() const;
};

/// Occupation-measure objective shared by every pi-step:
///   (q . pi - v0)^2 + log_weight sum_i log sum_u pi(i,u)
///                   + entropy_weight sum pi log pi
struct PiObjective {
  Eigen::VectorXd q;
  double v0 = 0.0;
  Index n_actions = 1;
  double log_weight = 0.0;
  double entropy_weight = 0.0;

  /// Value at pi; writes the gradient into `grad`.
  double operator()(const Eigen::VectorXd& pi, Eigen::VectorXd& grad) const;
  /// Diagonal of the convex part of the Hessian.
  Eigen::VectorXd curvature(const Eigen::VectorXd& pi) const;
};

/// One alternating round: full objective after the round and the
/// displacement used by the stopping test.
struct BcdRound {
  double objective = 0.0;
  double displacement = 0.0;
};

/// Best start of one Monte Carlo run.
struct RunSummary {
  int best_start = 0;
  double objective = 0.0;
  double log_det_paper = 0.0;
  double log_det_oracle = 0.0;
  /// |in-force cost . pi - reference cost| / reference cost
  double relative_cost_perturbation = 0.0;
  double param_perturbation = 0.0;
  optim::SolveStatus status = optim::SolveStatus::Converged;
  double final_kkt_residual = 0.0;
};

struct MaskingResult {
  MaskingMethod method = MaskingMethod::TotalCost;
  OccupationMeasure masked_pi{1, 1, Eigen::VectorXd::Ones(1)};
  Policy masked_policy{Eigen::MatrixXd::Ones(1, 1)};
  std::optional<Eigen::MatrixXd> perturbed_cost;
  std::optional<TransitionTensor> perturbed_transition;

  /// Average cost of the unmasked plan, c0 . pi0.
  double reference_cost = 0.0;
  /// (in-force cost . pi - reference_cost)^2 for the averaged plan.
  double total_cost_perturbation = 0.0;
  /// |in-force cost . pi - reference_cost| / reference_cost.
  double relative_cost_perturbation = 0.0;
  /// sum (c - c0)^2 for cost masking, sum |P - P0| for transition masking.
  double param_perturbation = 0.0;
  double log_det_paper = 0.0;
  double log_det_oracle = 0.0;

  /// Means over Monte Carlo runs of the per-run best-start values.
  double mean_log_det_paper = 0.0;
  double mean_log_det_oracle = 0.0;
  double mean_relative_cost_perturbation = 0.0;
  double mean_param_perturbation = 0.0;

  /// Run with the lowest objective (ties: lowest index).
  int best_run = 0;
  double best_objective = 0.0;
  /// Trace of the last nonlinear solve of the best run's best start.
  optim::SolveTrace trace;
  /// Alternating rounds of the best run's best start (empty for the
  /// single-block methods).
  std::vector<BcdRound> rounds;
  std::vector<RunSummary> runs;
};

/// Output of a single optimization from one starting point.
struct SingleStart {
  Eigen::VectorXd pi;
  Eigen::MatrixXd cost;
  TransitionTensor transition;
  double objective = 0.0;
  optim::SolveTrace trace;
  std::vector<BcdRound> rounds;
};

/// Random strictly interior occupation measure for `transition`: a
/// Dirichlet(1) policy per state, its induced occupation measure, then
/// projected onto the polytope with entries >= floor.
Eigen::VectorXd random_interior_occupation(const TransitionTensor& transition, double floor, Rng& rng);

/// Full objective of `method` at (pi, cost, transition).
double masking_objective(MaskingMethod method, const MdpModel& model, double reference_cost,
                         const MaskingConfig& cfg, const Eigen::VectorXd& pi, const Eigen::MatrixXd& cost,
                         const TransitionTensor& transition);

/// One start of `method`, initialised from `rng`. The alternating methods
/// run their rounds to completion here; they start from pi0 lifted onto the
/// floored flow polytope (and P0, c0), ignore `rng`, and so are solved once
/// per call to mask().
SingleStart solve_single_start(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                               const MaskingConfig& cfg, Rng& rng);

/// Minimiser over row-stochastic P > 0 with sum_{i,u} pi(i,u) P[i][u][j] =
/// sum_u pi(j,u) of
///   gamma1 sum |P - P0| - gamma2 sum log P.
/// Solved exactly through its concave dual (one multiplier per row and one
/// per flow equation). With gamma2 = 0 the problem is piecewise linear and
/// `previous` (feasible by construction) is returned when it equals P0.
struct TransitionStepResult {
  TransitionTensor transition;
  double flow_residual = 0.0;
  int newton_iterations = 0;
  bool converged = false;
};

TransitionStepResult transition_step(const TransitionTensor& p0, const TransitionTensor& previous,
                                     const Eigen::VectorXd& pi, double gamma1, double gamma2);

/// Monte Carlo masking: cfg.monte_carlo_runs runs keyed by
/// (master_seed, run), each keeping the best of cfg.starts_per_run starts.
/// The returned plan averages the runs' occupation measures (and perturbed
/// costs or transitions) entrywise, renormalises, and projects back onto
/// the flow polytope of the in-force transition tensor.
///
/// Throws SolverStall when a run's best start hit the iteration cap far from
/// stationarity, BcdNoProgress when an alternating round increased the
/// objective.
MaskingResult mask(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                   const MaskingConfig& cfg);

MaskingResult mask_total_cost(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg);
MaskingResult mask_state_action_cost(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg);
MaskingResult mask_transition(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg);
MaskingResult mask_max_entropy(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg);

/// Multiplier that drives the masking pressure of `method`: gamma for the
/// single-block methods, gamma2 for the alternating ones.
double& pressure(MaskingConfig& cfg, MaskingMethod method);

struct Calibration {
  double pressure = 0.0;
  MaskingResult result;
  /// |achieved - target| <= rel_tol * target.
  bool matched = false;
  int evaluations = 0;
};

/// Bisects the pressure multiplier in log space over [low, high] until the
/// averaged plan's relative cost perturbation is within rel_tol * target of
/// `target` (a fraction, 0.2 for 20%). The other fields of `cfg` are kept.
/// When no evaluated point matches, returns the closest one with
/// matched = false. Throws InvalidArgument for a non-positive bracket or
/// target.
Calibration calibrate(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                      const MaskingConfig& cfg, double target, double rel_tol = 0.005, double low = 1e-6,
                      double high = 1.0, int max_steps = 60);

}  // namespace covert::masking
