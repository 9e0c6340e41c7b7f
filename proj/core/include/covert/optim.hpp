#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace covert::optim {

/// Feasible set {x : eq_matrix * x = eq_rhs, x >= lower_bounds}.
struct LinearConstraints {
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::VectorXd lower_bounds;

  Eigen::Index dimension() const { return eq_matrix.cols(); }
  Eigen::Index rows() const { return eq_matrix.rows(); }

  /// Throws DimensionMismatch if the three members disagree.
  void check_dimensions() const;

  /// max |A x - b|.
  double equality_residual(const Eigen::VectorXd& x) const;
};

/// Drops rows of the equality system that are linear combinations of the
/// others. Throws Error(Infeasible) if a dropped row contradicts the rest.
LinearConstraints remove_redundant_rows(const LinearConstraints& constraints, double tol = 1e-10);

struct LpProblem {
  Eigen::VectorXd objective;
  LinearConstraints constraints;
};

struct LpOptions {
  int max_iterations = 100000;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-9;
};

/// Two-phase revised simplex, Dantzig pricing with Bland's rule against
/// cycling on degenerate stretches. Returns a basic optimal
/// solution. Throws Infeasible, Unbounded or SolverStall.
Eigen::VectorXd lp_solve(const LpProblem& problem, const LpOptions& options = {});

/// Euclidean projection onto a LinearConstraints set, computed by a
/// semismooth Newton method on the dual of
///   min 1/2 |y - z|^2  s.t.  A y = b, y >= l.
/// The projector keeps its last multipliers and warm-starts from them, so
/// a sequence of nearby projections (one per gradient step) costs a few
/// small linear solves each. Bounds hold exactly; equalities to ~1e-12,
/// never worse than 1e-10 relative to the right-hand side.
class Projector {
 public:
  explicit Projector(const LinearConstraints& constraints);

  Eigen::VectorXd operator()(const Eigen::VectorXd& z);
  /// Projection in the metric |v|^2 = sum_i v_i^2 / metric_i. Warm starts
  /// are kept apart from the Euclidean ones. Throws InvalidArgument unless
  /// every metric entry is positive.
  Eigen::VectorXd operator()(const Eigen::VectorXd& z, const Eigen::VectorXd& metric);

  const LinearConstraints& constraints() const { return constraints_; }
  void reset_warm_start() {
    multipliers_.setZero();
    scaled_multipliers_.setZero();
  }

 private:
  LinearConstraints constraints_;
  Eigen::VectorXd multipliers_;
  Eigen::VectorXd scaled_multipliers_;
  // Newton stops at tol_ (plus a rounding allowance); a stalled iterate is
  // still accepted when within accept_tol_.
  double tol_;
  double accept_tol_;
  double a_norm_;

  Eigen::VectorXd project(const Eigen::VectorXd& z, const Eigen::VectorXd* metric, Eigen::VectorXd& multipliers) const;
  bool polish(const Eigen::VectorXd& z, const Eigen::VectorXd& d, Eigen::VectorXd& lambda, Eigen::VectorXd& y) const;
};

/// One-shot projection; see Projector. Throws Infeasible if the set is empty.
Eigen::VectorXd project_to_affine_nonneg(const Eigen::VectorXd& x, const LinearConstraints& feasible_set);

enum class SolveStatus { Converged, IterationCap, LineSearchFail };

std::string to_string(SolveStatus status);

struct SolveTrace {
  std::vector<double> iterates_objective;
  double final_kkt_residual = 0.0;
  SolveStatus status = SolveStatus::Converged;
  int iterations = 0;
};

/// Value-and-gradient callback. Writes the gradient into the second
/// argument (already sized) and returns the objective value.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct NlpProblem {
  Objective objective;
  LinearConstraints feasible_set;
  Eigen::VectorXd x0;
  double tol = 1e-8;
  int max_iters = 10000;
  double armijo_c = 1e-4;
  double backtrack_shrink = 0.5;
  /// Optional positive diagonal metric, typically the inverse of a diagonal
  /// curvature estimate. Steps become x - t D grad projected in the D^-1
  /// metric; the stopping test stays Euclidean.
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> scaling;
  /// Keep every objective value in the trace (otherwise first and last).
  bool record_all_iterates = true;
};

struct NlpResult {
  Eigen::VectorXd x;
  SolveTrace trace;
};

/// Projected gradient with Barzilai-Borwein trial steps and Armijo
/// backtracking along the projection arc. The objective sequence is
/// monotonically non-increasing. Stops when |x - P(x - grad)| <= tol.
///
/// Throws Error(InfeasibleStart) when x0 violates the bounds or the
/// equalities by more than 1e-8.
NlpResult nlp_minimize(const NlpProblem& problem);

/// Same as nlp_minimize but reuses a caller-owned projector.
NlpResult nlp_minimize(const NlpProblem& problem, Projector& projector);

}  // namespace covert::optim
