#include "covert/masking.hpp"

#include <cmath>
#include <limits>

#include "covert/error.hpp"
#include "covert/fim.hpp"

namespace covert::masking {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double PiObjective::operator()(const VectorXd& pi, VectorXd& grad) const {
  const double r = q.dot(pi) - v0;
  double f = r * r;
  grad = 2.0 * r * q;
  if (log_weight != 0.0) {
    for (Index i = 0; i < pi.size() / n_actions; ++i) {
      const double d = pi.segment(i * n_actions, n_actions).sum();
      f += log_weight * std::log(d);
      grad.segment(i * n_actions, n_actions).array() += log_weight / d;
    }
  }
  if (entropy_weight != 0.0) {
    for (Index e = 0; e < pi.size(); ++e) {
      const double lp = std::log(pi(e));
      f += entropy_weight * pi(e) * lp;
      grad(e) += entropy_weight * (lp + 1.0);
    }
  }
  return f;
}

VectorXd PiObjective::curvature(const VectorXd& pi) const {
  VectorXd h = 2.0 * q.cwiseAbs2();
  if (entropy_weight != 0.0) h += entropy_weight * pi.cwiseInverse();
  return h;
}

namespace {

constexpr double kStallKkt = 1e-3;
constexpr double kRoundSlack = 1e-10;

VectorXd flatten(const MatrixXd& m) {
  VectorXd v(m.size());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index u = 0; u < m.cols(); ++u) v(i * m.cols() + u) = m(i, u);
  }
  return v;
}

double sum_log_marginals(const VectorXd& pi, Index n_actions) {
  double s = 0.0;
  for (Index i = 0; i < pi.size() / n_actions; ++i) s += std::log(pi.segment(i * n_actions, n_actions).sum());
  return s;
}

double sum_log_transition(const TransitionTensor& t) { return t.flat().array().log().sum(); }

optim::NlpResult run_pi_step(const PiObjective& objective, optim::Projector& projector, const VectorXd& start,
                             const MaskingConfig& cfg) {
  optim::NlpProblem problem;
  problem.objective = [&objective](const VectorXd& x, VectorXd& g) { return objective(x, g); };
  problem.feasible_set = projector.constraints();
  problem.x0 = start;
  problem.tol = cfg.solver_tol;
  problem.max_iters = cfg.solver_max_iters;
  problem.record_all_iterates = false;
  if (objective.entropy_weight > 0.0) {
    // Entries near zero make the entropy term stiff; scaling by its inverse
    // curvature keeps the step count independent of how small they get.
    problem.scaling = [&objective](const VectorXd& x) -> VectorXd { return objective.curvature(x).cwiseInverse(); };
  }
  return optim::nlp_minimize(problem, projector);
}

MatrixXd to_matrix(const VectorXd& flat, Index n_states, Index n_actions) {
  MatrixXd m(n_states, n_actions);
  for (Index i = 0; i < n_states; ++i) {
    for (Index u = 0; u < n_actions; ++u) m(i, u) = flat(i * n_actions + u);
  }
  return m;
}

double in_force_cost(MaskingMethod method, const MdpModel& model, const MatrixXd& cost, const VectorXd& pi) {
  return method == MaskingMethod::StateActionCost ? flatten(cost).dot(pi) : model.cost_flat().dot(pi);
}

double param_perturbation(MaskingMethod method, const MdpModel& model, const MatrixXd& cost,
                          const TransitionTensor& transition) {
  switch (method) {
    case MaskingMethod::StateActionCost: return (cost - model.cost()).squaredNorm();
    case MaskingMethod::Transition: return (transition.flat() - model.transition().flat()).lpNorm<1>();
    default: return 0.0;
  }
}

SingleStart single_block(MaskingMethod method, const MdpModel& model, double reference_cost,
                         const MaskingConfig& cfg, Rng& rng) {
  optim::Projector projector(flow_constraints(model.transition(), cfg.floor));
  const VectorXd start = random_interior_occupation(model.transition(), cfg.floor, rng);
  PiObjective objective{model.cost_flat(), reference_cost, model.n_actions()};
  if (method == MaskingMethod::TotalCost) {
    objective.log_weight = cfg.gamma;
  } else {
    objective.entropy_weight = cfg.gamma;
  }
  optim::NlpResult solved = run_pi_step(objective, projector, start, cfg);
  SingleStart out{std::move(solved.x), model.cost(), model.transition(), 0.0, std::move(solved.trace), {}};
  out.objective = masking_objective(method, model, reference_cost, cfg, out.pi, out.cost, out.transition);
  return out;
}

// Both alternating schemes start from the reference plan lifted onto the
// floored flow polytope, so zero pressure leaves it in place.
VectorXd floored_reference(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg) {
  return optim::project_to_affine_nonneg(pi0.flat(), flow_constraints(model.transition(), cfg.floor));
}

SingleStart alternate_costs(const MdpModel& model, const OccupationMeasure& pi0, double reference_cost,
                            const MaskingConfig& cfg) {
  optim::Projector projector(flow_constraints(model.transition(), cfg.floor));
  VectorXd pi = floored_reference(model, pi0, cfg);
  const VectorXd c0 = model.cost_flat();
  VectorXd c = c0;

  auto full_objective = [&](const VectorXd& cost, const VectorXd& x) {
    return masking_objective(MaskingMethod::StateActionCost, model, reference_cost, cfg, x,
                             to_matrix(cost, model.n_states(), model.n_actions()), model.transition());
  };

  SingleStart out{pi, MatrixXd(), model.transition(), full_objective(c, pi), {}, {}};
  double previous = out.objective;
  for (int round = 0; round < cfg.bcd_max_rounds; ++round) {
    // Cost block: argmin_c (c . pi - v0)^2 + gamma1 |c - c0|^2 in closed form.
    const double r0 = c0.dot(pi) - reference_cost;
    const VectorXd c_next = c0 - (r0 / (cfg.gamma1 + pi.squaredNorm())) * pi;

    PiObjective objective{c_next, reference_cost, model.n_actions(), cfg.gamma2, 0.0};
    optim::NlpResult solved = run_pi_step(objective, projector, pi, cfg);

    const double displacement = (c_next - c).squaredNorm() + (solved.x - pi).squaredNorm();
    c = c_next;
    pi = std::move(solved.x);
    out.trace = std::move(solved.trace);
    const double value = full_objective(c, pi);
    out.rounds.push_back({value, displacement});
    if (value > previous + kRoundSlack * std::max(1.0, std::abs(previous))) {
      throw Error(ErrorCode::BcdNoProgress, "cost/plan alternation increased the objective");
    }
    previous = value;
    if (displacement <= cfg.bcd_threshold) break;
  }
  out.pi = pi;
  out.cost = to_matrix(c, model.n_states(), model.n_actions());
  out.objective = previous;
  return out;
}

SingleStart alternate_transitions(const MdpModel& model, const OccupationMeasure& pi0, double reference_cost,
                                  const MaskingConfig& cfg) {
  const TransitionTensor& p0 = model.transition();
  VectorXd pi = floored_reference(model, pi0, cfg);
  TransitionTensor p = p0;

  auto full_objective = [&](const VectorXd& x, const TransitionTensor& t) {
    return masking_objective(MaskingMethod::Transition, model, reference_cost, cfg, x, model.cost(), t);
  };

  SingleStart out{pi, model.cost(), p, full_objective(pi, p), {}, {}};
  double previous = out.objective;
  const double log_weight = cfg.gamma2 * static_cast<double>(model.n_pairs());
  for (int round = 0; round < cfg.bcd_max_rounds; ++round) {
    TransitionStepResult step = transition_step(p0, p, pi, cfg.gamma1, cfg.gamma2);
    TransitionTensor p_next = p;
    if (step.flow_residual <= 1e-10 && full_objective(pi, step.transition) <= full_objective(pi, p)) {
      p_next = std::move(step.transition);
    }

    optim::Projector projector(flow_constraints(p_next, cfg.floor));
    PiObjective objective{model.cost_flat(), reference_cost, model.n_actions(), log_weight, 0.0};
    optim::NlpResult solved = run_pi_step(objective, projector, pi, cfg);

    const double displacement =
        (p_next.flat() - p.flat()).lpNorm<1>() + (solved.x - pi).lpNorm<1>();
    p = std::move(p_next);
    pi = std::move(solved.x);
    out.trace = std::move(solved.trace);
    const double value = full_objective(pi, p);
    out.rounds.push_back({value, displacement});
    if (value > previous + kRoundSlack * std::max(1.0, std::abs(previous))) {
      throw Error(ErrorCode::BcdNoProgress, "transition/plan alternation increased the objective");
    }
    previous = value;
    if (displacement <= cfg.bcd_threshold) break;
  }
  out.pi = pi;
  out.transition = p;
  out.objective = previous;
  return out;
}

}  // namespace

std::string to_string(MaskingMethod method) {
  switch (method) {
    case MaskingMethod::TotalCost: return "total";
    case MaskingMethod::StateActionCost: return "cost";
    case MaskingMethod::Transition: return "transition";
    case MaskingMethod::MaxEntropy: return "entropy";
  }
  return "unknown";
}

MaskingMethod parse_method(const std::string& name) {
  if (name == "total") return MaskingMethod::TotalCost;
  if (name == "cost") return MaskingMethod::StateActionCost;
  if (name == "transition") return MaskingMethod::Transition;
  if (name == "entropy") return MaskingMethod::MaxEntropy;
  throw Error(ErrorCode::InvalidArgument, "unknown masking method '" + name + "' (expected total|cost|transition|entropy)");
}

void MaskingConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "masking: " + what); };
  for (double g : {gamma, gamma1, gamma2}) {
    if (!(g >= 0.0) || !std::isfinite(g)) fail("multipliers must be finite and non-negative");
  }
  if (!(chi > 0.0)) fail("chi must be positive");
  if (!(bcd_threshold > 0.0)) fail("bcd_threshold must be positive");
  if (bcd_max_rounds < 1) fail("bcd_max_rounds must be at least 1");
  if (monte_carlo_runs < 1) fail("monte_carlo_runs must be at least 1");
  if (starts_per_run < 1) fail("starts_per_run must be at least 1");
  if (!(floor > 0.0) || floor >= 1e-3) fail("floor must lie in (0, 1e-3)");
  if (!(solver_tol > 0.0)) fail("solver_tol must be positive");
  if (solver_max_iters < 1) fail("solver_max_iters must be at least 1");
}

VectorXd random_interior_occupation(const TransitionTensor& transition, double floor, Rng& rng) {
  const Index n = transition.n_states();
  const Index m = transition.n_actions();
  MatrixXd mu(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index u = 0; u < m; ++u) mu(i, u) = rng.exponential();
    mu.row(i) /= mu.row(i).sum();
  }
  const OccupationMeasure occ = occupation_from_policy(transition, Policy(std::move(mu)));
  return optim::project_to_affine_nonneg(occ.flat(), flow_constraints(transition, floor));
}

double masking_objective(MaskingMethod method, const MdpModel& model, double reference_cost,
                         const MaskingConfig& cfg, const VectorXd& pi, const MatrixXd& cost,
                         const TransitionTensor& transition) {
  const double r = in_force_cost(method, model, cost, pi) - reference_cost;
  const double fit = r * r;
  switch (method) {
    case MaskingMethod::TotalCost: return fit + cfg.gamma * sum_log_marginals(pi, model.n_actions());
    case MaskingMethod::MaxEntropy: return fit + cfg.gamma * (pi.array() * pi.array().log()).sum();
    case MaskingMethod::StateActionCost:
      return fit + cfg.gamma1 * (cost - model.cost()).squaredNorm() +
             cfg.gamma2 * sum_log_marginals(pi, model.n_actions());
    case MaskingMethod::Transition:
      return fit + cfg.gamma1 * (transition.flat() - model.transition().flat()).lpNorm<1>() +
             cfg.gamma2 * (static_cast<double>(model.n_pairs()) * sum_log_marginals(pi, model.n_actions()) -
                           sum_log_transition(transition));
  }
  return fit;
}

SingleStart solve_single_start(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                               const MaskingConfig& cfg, Rng& rng) {
  const double reference_cost = average_cost(pi0, model);
  switch (method) {
    case MaskingMethod::TotalCost:
    case MaskingMethod::MaxEntropy: return single_block(method, model, reference_cost, cfg, rng);
    case MaskingMethod::StateActionCost: return alternate_costs(model, pi0, reference_cost, cfg);
    case MaskingMethod::Transition: return alternate_transitions(model, pi0, reference_cost, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown masking method");
}

MaskingResult mask(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                   const MaskingConfig& cfg) {
  cfg.validate();
  if (pi0.n_states() != model.n_states() || pi0.n_actions() != model.n_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "reference plan and model disagree in shape");
  }
  const Index n = model.n_states();
  const Index m = model.n_actions();
  const double reference_cost = average_cost(pi0, model);

  MaskingResult result;
  result.method = method;
  result.reference_cost = reference_cost;
  result.runs.reserve(static_cast<std::size_t>(cfg.monte_carlo_runs));

  VectorXd pi_sum = VectorXd::Zero(model.n_pairs());
  MatrixXd cost_sum = MatrixXd::Zero(n, m);
  VectorXd transition_sum = VectorXd::Zero(model.transition().flat().size());
  double best_overall = std::numeric_limits<double>::infinity();

  const bool alternating = method == MaskingMethod::StateActionCost || method == MaskingMethod::Transition;
  std::optional<SingleStart> deterministic;
  for (int run = 0; run < cfg.monte_carlo_runs; ++run) {
    std::optional<SingleStart> best;
    int best_start = 0;
    if (alternating) {
      if (!deterministic) {
        Rng unused(cfg.master_seed);
        deterministic = solve_single_start(method, model, pi0, cfg, unused);
      }
      best = deterministic;
    }
    for (int s = 0; !alternating && s < cfg.starts_per_run; ++s) {
      Rng rng(stream_seed(cfg.master_seed, static_cast<std::uint64_t>(run), static_cast<std::uint64_t>(s)));
      SingleStart candidate = solve_single_start(method, model, pi0, cfg, rng);
      if (!best || candidate.objective < best->objective) {
        best = std::move(candidate);
        best_start = s;
      }
    }
    if (best->trace.status == optim::SolveStatus::IterationCap && best->trace.final_kkt_residual > kStallKkt) {
      throw Error(ErrorCode::SolverStall, "run " + std::to_string(run) + " stopped at the iteration cap with KKT residual " +
                                              std::to_string(best->trace.final_kkt_residual));
    }

    const OccupationMeasure occ(n, m, best->pi);
    RunSummary summary;
    summary.best_start = best_start;
    summary.objective = best->objective;
    summary.log_det_paper = log_det_fim_paper(occ, best->transition);
    summary.log_det_oracle = log_det_fim_oracle(augment(best->transition, occ));
    summary.relative_cost_perturbation =
        std::abs(in_force_cost(method, model, best->cost, best->pi) - reference_cost) / reference_cost;
    summary.param_perturbation = param_perturbation(method, model, best->cost, best->transition);
    summary.status = best->trace.status;
    summary.final_kkt_residual = best->trace.final_kkt_residual;
    result.runs.push_back(summary);

    pi_sum += best->pi;
    cost_sum += best->cost;
    transition_sum += best->transition.flat();
    if (best->objective < best_overall) {
      best_overall = best->objective;
      result.best_run = run;
      result.best_objective = best->objective;
      result.trace = best->trace;
      result.rounds = best->rounds;
    }
  }

  const double runs = static_cast<double>(cfg.monte_carlo_runs);
  for (const RunSummary& s : result.runs) {
    result.mean_log_det_paper += s.log_det_paper / runs;
    result.mean_log_det_oracle += s.log_det_oracle / runs;
    result.mean_relative_cost_perturbation += s.relative_cost_perturbation / runs;
    result.mean_param_perturbation += s.param_perturbation / runs;
  }

  MatrixXd cost = model.cost();
  TransitionTensor transition = model.transition();
  if (method == MaskingMethod::StateActionCost) {
    cost = cost_sum / runs;
    result.perturbed_cost = cost;
  }
  if (method == MaskingMethod::Transition) {
    transition.flat() = transition_sum / runs;
    for (Index i = 0; i < n; ++i) {
      for (Index u = 0; u < m; ++u) transition.row(i, u) /= transition.row(i, u).sum();
    }
    validate_transition(transition);
    result.perturbed_transition = transition;
  }

  VectorXd pi = pi_sum / pi_sum.sum();
  pi = optim::project_to_affine_nonneg(pi, flow_constraints(transition, cfg.floor));
  result.masked_pi = OccupationMeasure(n, m, pi);
  result.masked_policy = extract_policy(result.masked_pi);

  const double in_force = in_force_cost(method, model, cost, pi);
  result.total_cost_perturbation = (in_force - reference_cost) * (in_force - reference_cost);
  result.relative_cost_perturbation = std::abs(in_force - reference_cost) / reference_cost;
  result.param_perturbation = param_perturbation(method, model, cost, transition);
  result.log_det_paper = log_det_fim_paper(result.masked_pi, transition);
  result.log_det_oracle = log_det_fim_oracle(augment(transition, result.masked_pi));
  return result;
}

MaskingResult mask_total_cost(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg) {
  return mask(MaskingMethod::TotalCost, model, pi0, cfg);
}

MaskingResult mask_state_action_cost(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg) {
  return mask(MaskingMethod::StateActionCost, model, pi0, cfg);
}

MaskingResult mask_transition(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg) {
  return mask(MaskingMethod::Transition, model, pi0, cfg);
}

MaskingResult mask_max_entropy(const MdpModel& model, const OccupationMeasure& pi0, const MaskingConfig& cfg) {
  return mask(MaskingMethod::MaxEntropy, model, pi0, cfg);
}

double& pressure(MaskingConfig& cfg, MaskingMethod method) {
  return method == MaskingMethod::StateActionCost || method == MaskingMethod::Transition ? cfg.gamma2 : cfg.gamma;
}

Calibration calibrate(MaskingMethod method, const MdpModel& model, const OccupationMeasure& pi0,
                      const MaskingConfig& cfg, double target, double rel_tol, double low, double high,
                      int max_steps) {
  if (!(target > 0.0) || !(rel_tol > 0.0) || !(low > 0.0) || !(high > low) || max_steps < 1) {
    throw Error(ErrorCode::InvalidArgument, "calibration needs 0 < low < high and positive target and tolerance");
  }
  MaskingConfig trial = cfg;
  Calibration best;
  double best_gap = std::numeric_limits<double>::infinity();
  double lo = std::log(low);
  double hi = std::log(high);
  for (int step = 0; step < max_steps; ++step) {
    const double value = std::exp(0.5 * (lo + hi));
    pressure(trial, method) = value;
    MaskingResult r = mask(method, model, pi0, trial);
    ++best.evaluations;
    const double achieved = r.relative_cost_perturbation;
    const double gap = std::abs(achieved - target);
    if (gap < best_gap) {
      best_gap = gap;
      best.pressure = value;
      best.result = std::move(r);
    }
    if (gap <= rel_tol * target) {
      best.matched = true;
      break;
    }
    if (achieved < target) {
      lo = std::log(value);
    } else {
      hi = std::log(value);
    }
  }
  return best;
}

}  // namespace covert::masking
