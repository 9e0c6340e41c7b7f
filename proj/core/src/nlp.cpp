#include <algorithm>
#include <cmath>

#include "covert/error.hpp"
#include "covert/optim.hpp"

namespace covert::optim {

using Eigen::Index;
using Eigen::VectorXd;

namespace {

constexpr double kMaxMove = 1e2;

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::IterationCap: return "IterationCap";
    case SolveStatus::LineSearchFail: return "LineSearchFail";
  }
  return "Unknown";
}

NlpResult nlp_minimize(const NlpProblem& problem) {
  Projector projector(problem.feasible_set);
  return nlp_minimize(problem, projector);
}

NlpResult nlp_minimize(const NlpProblem& problem, Projector& projector) {
  const LinearConstraints& set = problem.feasible_set;
  set.check_dimensions();
  if (!problem.objective) throw Error(ErrorCode::InvalidArgument, "objective callback is empty");
  if (!(problem.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (problem.x0.size() != set.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "x0 length differs from the feasible set dimension");
  }
  if ((problem.x0 - set.lower_bounds).minCoeff() < -1e-12 || set.equality_residual(problem.x0) > 1e-8) {
    throw Error(ErrorCode::InfeasibleStart, "x0 is not in the feasible set");
  }

  NlpResult result;
  SolveTrace& trace = result.trace;
  VectorXd x = projector(problem.x0);
  VectorXd g(x.size());
  double f = problem.objective(x, g);
  if (!std::isfinite(f)) throw Error(ErrorCode::InfeasibleStart, "objective is not finite at x0");
  trace.iterates_objective.push_back(f);

  double alpha = std::clamp(1.0 / std::max(g.lpNorm<Eigen::Infinity>(), 1e-300), 1e-12, 1e12);
  const bool scaled = static_cast<bool>(problem.scaling);
  VectorXd metric;
  VectorXd direction(x.size());
  VectorXd trial(x.size());
  VectorXd g_trial(x.size());
  trace.status = SolveStatus::IterationCap;

  int k = 0;
  for (; k < problem.max_iters; ++k) {
    trace.final_kkt_residual = (x - projector(x - g)).norm();
    if (trace.final_kkt_residual <= problem.tol) {
      trace.status = SolveStatus::Converged;
      break;
    }

    // Moves much longer than the iterate itself only amplify rounding in
    // the projection.
    if (scaled) {
      metric = problem.scaling(x);
      if (metric.size() != x.size() || !(metric.minCoeff() > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "scaling must return a positive vector of the iterate's length");
      }
      direction = metric.cwiseProduct(g);
    } else {
      direction = g;
    }
    // Components held at their bound by the gradient do not move, so they
    // are left out of the cap.
    double g_norm = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
      if (x(i) > set.lower_bounds(i) || direction(i) < 0.0) g_norm = std::max(g_norm, std::abs(direction(i)));
    }
    const double max_step = kMaxMove * std::max(1.0, x.lpNorm<Eigen::Infinity>()) / std::max(g_norm, 1e-300);
    bool accepted = false;
    double f_trial = f;
    double step = std::min(alpha, max_step);
    for (int ls = 0; ls < 80; ++ls) {
      trial = scaled ? projector(x - step * direction, metric) : projector(x - step * direction);
      const VectorXd d = trial - x;
      if (d.lpNorm<Eigen::Infinity>() == 0.0) break;
      f_trial = problem.objective(trial, g_trial);
      if (f_trial <= f + problem.armijo_c * g.dot(d)) {
        accepted = true;
        break;
      }
      step *= problem.backtrack_shrink;
    }
    if (!accepted) {
      trace.status = SolveStatus::LineSearchFail;
      break;
    }

    const VectorXd s = trial - x;
    const double sy = s.dot(g_trial - g);
    const double ss = scaled ? s.cwiseAbs2().cwiseQuotient(metric).sum() : s.squaredNorm();
    alpha = sy > 0.0 ? std::clamp(ss / sy, 1e-12, 1e12) : std::min(step * 4.0, 1e12);
    x.swap(trial);
    g.swap(g_trial);
    f = f_trial;
    if (problem.record_all_iterates) trace.iterates_objective.push_back(f);
  }
  if (!problem.record_all_iterates) trace.iterates_objective.push_back(f);
  trace.iterations = k;
  result.x = std::move(x);
  return result;
}

}  // namespace covert::optim
