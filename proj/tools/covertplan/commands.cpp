#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "covert/adversary.hpp"
#include "covert/error.hpp"
#include "covert/io.hpp"
#include "covert/masking.hpp"
#include "covert/mdp.hpp"
#include "covert/rng.hpp"
#include "csv.hpp"
#include "svg.hpp"

namespace covertplan {

using covert::Index;
using covert::Policy;
using covert::TransitionTensor;
using nlohmann::json;
namespace fs = std::filesystem;
namespace masking = covert::masking;
namespace adversary = covert::adversary;

namespace {

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output_dir) / name).string();
}

void prepare_output(const ExperimentConfig& cfg) {
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec || !fs::is_directory(cfg.output_dir)) throw ConfigError("cannot create output directory " + cfg.output_dir);
  covert::io::write_json_file((fs::path(cfg.output_dir) / "effective_config.json").string(), describe(cfg));
}

bool is_deterministic(const Policy& policy) {
  for (Index i = 0; i < policy.n_states(); ++i) {
    if (policy.matrix().row(i).maxCoeff() < 1.0 - 1e-12) return false;
  }
  return true;
}

struct Stats {
  double mean = 0.0;
  double stderr_ = 0.0;
};

Stats summarize(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

// Seed of adversary run `run` at sample size n; shared between plans so
// comparisons use common random numbers.
std::uint64_t run_seed(std::uint64_t master, Index n, int run) {
  return covert::stream_seed(master, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(run));
}

struct AdversaryRun {
  int run = 0;
  Index n_steps = 0;
  std::uint64_t seed = 0;
  adversary::TvError error;
  std::vector<bool> visited_rows;
};

AdversaryRun simulate(const TransitionTensor& truth, const Policy& policy, Index n_steps, std::uint64_t seed, int run) {
  covert::Rng start(covert::stream_seed(seed, 0xC0FFEEULL));
  const Index x0 = adversary::draw_stationary_state(truth, policy, start);
  const adversary::TrajectorySample sample = adversary::sample_trajectory(truth, policy, n_steps, seed, x0);
  const adversary::AdversaryEstimate est = adversary::mle_estimate(sample, truth.n_states(), truth.n_actions());
  const adversary::ExtractedEstimates ex = adversary::extract_estimates(est);
  AdversaryRun r;
  r.run = run;
  r.n_steps = n_steps;
  r.seed = seed;
  r.error = adversary::tv_error(ex.p_hat, truth, &ex.visited_rows);
  r.visited_rows = ex.visited_rows;
  return r;
}

std::vector<std::string> run_cells(const AdversaryRun& r) {
  return {std::to_string(r.run), std::to_string(r.n_steps), format_number(r.error.tv), format_number(r.error.l1),
          std::to_string(r.error.rows_used), std::to_string(r.seed)};
}

struct LoadedPlan {
  Policy policy;
  TransitionTensor truth;
};

LoadedPlan load_plan(const ExperimentConfig& cfg, const std::string& path) {
  try {
    const json doc = covert::io::read_json_file(path);
    const char* key = doc.contains("policy") ? "policy" : "masked_policy";
    if (!doc.contains(key)) throw ConfigError(path + ": no 'policy' or 'masked_policy' entry");
    Policy policy(covert::io::matrix_from_json(doc.at(key)));
    TransitionTensor truth = doc.contains("perturbed_transition")
                                 ? covert::io::transition_from_json(doc.at("perturbed_transition"))
                                 : cfg.model.transition();
    if (policy.n_states() != truth.n_states() || policy.n_actions() != truth.n_actions()) {
      throw ConfigError(path + ": plan shape differs from the model");
    }
    covert::validate_transition(truth);
    return {std::move(policy), std::move(truth)};
  } catch (const covert::Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

json plan_document(const masking::Calibration& cal) {
  json doc = covert::io::to_json(cal.result);
  doc["pressure"] = cal.pressure;
  doc["matched"] = cal.matched;
  doc["evaluations"] = cal.evaluations;
  return doc;
}

}  // namespace

void cmd_solve(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const covert::OccupationMeasure pi = covert::solve_average_cost_lp(cfg.model);
  const Policy policy = covert::extract_policy(pi);
  json plan = {{"average_cost", covert::average_cost(pi, cfg.model)},
               {"occupation", covert::io::to_json(pi.as_matrix())},
               {"policy", covert::io::to_json(policy.matrix())},
               {"deterministic", is_deterministic(policy)},
               {"flow_residual", covert::flow_residual(pi, cfg.model.transition())}};
  if (cfg.scenario) plan["action_names"] = cfg.scenario->action_names;
  covert::io::write_json_file(out_path(cfg, "plan.json"), plan);
  covert::io::write_json_file(out_path(cfg, "model.json"), covert::io::to_json(cfg.model));
  std::printf("average cost %.10g, plan written to %s\n", plan["average_cost"].get<double>(),
              out_path(cfg, "plan.json").c_str());
}

void cmd_sweep(const ExperimentConfig& cfg) {
  prepare_output(cfg);
  const covert::OccupationMeasure pi0 = covert::solve_average_cost_lp(cfg.model);
  CsvWriter csv(out_path(cfg, "sweep.csv"),
                {"gamma", "gamma1", "gamma2", "mean_logdet_paper", "mean_logdet_oracle", "mean_cost_perturbation_pct",
                 "mean_param_perturbation", "n_runs", "seed"});
  const std::vector<double> grid = cfg.sweep.grid();
  Series logdet{"log det (closed form)", {}, {}};
  Series oracle{"log det (assembled)", {}, {}};
  Series pct{"cost perturbation %", {}, {}};
  for (double value : grid) {
    masking::MaskingConfig point = cfg.masking;
    if (cfg.sweep.parameter == "gamma") point.gamma = value;
    if (cfg.sweep.parameter == "gamma1") point.gamma1 = value;
    if (cfg.sweep.parameter == "gamma2") point.gamma2 = value;
    const masking::MaskingResult r = masking::mask(cfg.method, cfg.model, pi0, point);
    csv.row({format_number(point.gamma), format_number(point.gamma1), format_number(point.gamma2),
             format_number(r.mean_log_det_paper), format_number(r.mean_log_det_oracle),
             format_number(100.0 * r.mean_relative_cost_perturbation), format_number(r.mean_param_perturbation),
             std::to_string(point.monte_carlo_runs), std::to_string(point.master_seed)});
    logdet.x.push_back(value);
    logdet.y.push_back(r.mean_log_det_paper);
    oracle.x.push_back(value);
    oracle.y.push_back(r.mean_log_det_oracle);
    pct.x.push_back(value);
    pct.y.push_back(100.0 * r.mean_relative_cost_perturbation);
    std::printf("%s=%g  log det %.6g  perturbation %.4g%%\n", cfg.sweep.parameter.c_str(), value,
                r.mean_log_det_paper, 100.0 * r.mean_relative_cost_perturbation);
  }
  const std::string title = "masking sweep (" + masking::to_string(cfg.method) + ")";
  bool log_x = true;
  for (double v : grid) log_x = log_x && v > 0.0;
  write_line_chart(out_path(cfg, "sweep_logdet.svg"), {title, cfg.sweep.parameter, "mean log det FIM", log_x},
                   {logdet, oracle});
  write_line_chart(out_path(cfg, "sweep_perturbation.svg"),
                   {title, cfg.sweep.parameter, "mean total cost perturbation (%)", log_x}, {pct});
}

void cmd_adversary(const ExperimentConfig& cfg, const std::string& plan_path) {
  const LoadedPlan plan = load_plan(cfg, plan_path);
  prepare_output(cfg);
  const Index n = plan.truth.n_states();
  const Index m = plan.truth.n_actions();
  CsvWriter csv(out_path(cfg, "adversary.csv"), {"run", "N", "tv_error", "l1_error", "rows_used", "seed"});

  json per_size = json::array();
  for (Index n_steps : cfg.adversary.sample_sizes) {
    std::vector<double> tv;
    std::vector<double> l1;
    std::vector<int> unvisited(static_cast<std::size_t>(n * m), 0);
    for (int run = 0; run < cfg.adversary.runs; ++run) {
      const AdversaryRun r = simulate(plan.truth, plan.policy, n_steps, run_seed(cfg.masking.master_seed, n_steps, run), run);
      csv.row(run_cells(r));
      tv.push_back(r.error.tv);
      l1.push_back(r.error.l1);
      for (std::size_t k = 0; k < r.visited_rows.size(); ++k) unvisited[k] += r.visited_rows[k] ? 0 : 1;
    }
    json missing = json::array();
    for (Index k = 0; k < n * m; ++k) {
      const int count = unvisited[static_cast<std::size_t>(k)];
      if (count > 0) missing.push_back({{"state", k / m}, {"action", k % m}, {"runs_unvisited", count}});
    }
    const Stats tv_stats = summarize(tv);
    const Stats l1_stats = summarize(l1);
    per_size.push_back({{"N", n_steps},
                        {"runs", cfg.adversary.runs},
                        {"mean_tv_error", tv_stats.mean},
                        {"stderr_tv_error", tv_stats.stderr_},
                        {"mean_l1_error", l1_stats.mean},
                        {"stderr_l1_error", l1_stats.stderr_},
                        {"unvisited_rows", std::move(missing)}});
    std::printf("N=%lld  mean TV error %.6g (se %.3g)\n", static_cast<long long>(n_steps), tv_stats.mean,
                tv_stats.stderr_);
  }

  json report = {{"seed", cfg.masking.master_seed}, {"deterministic_policy", is_deterministic(plan.policy)},
                 {"sample_sizes", std::move(per_size)}};
  if (cfg.adversary.crb_runs == 0) {
    report["crb"] = {{"skipped", "crb_runs is 0"}};
  } else if (!(plan.policy.matrix().minCoeff() > 0.0)) {
    report["crb"] = {{"skipped", "policy has zero entries, so the pair chain is not positive"}};
  } else {
    try {
      report["crb"] = covert::io::to_json(
          adversary::crb_check(plan.truth, plan.policy, cfg.adversary.crb_steps, cfg.adversary.crb_runs,
                               covert::stream_seed(cfg.masking.master_seed, 0xC5B0ULL)));
    } catch (const covert::Error& e) {
      if (e.code() != covert::ErrorCode::UnvisitedRow) throw;
      report["crb"] = {{"skipped", e.what()}};
    }
  }
  covert::io::write_json_file(out_path(cfg, "crb_report.json"), report);
}

void cmd_compare(const ExperimentConfig& cfg) {
  if (cfg.method == masking::MaskingMethod::MaxEntropy) {
    throw ConfigError("compare: masking.method selects the Fisher side and cannot be 'entropy'");
  }
  prepare_output(cfg);
  const covert::OccupationMeasure pi0 = covert::solve_average_cost_lp(cfg.model);
  const double target = cfg.compare.target_pct / 100.0;
  const CompareSpec& c = cfg.compare;

  const masking::Calibration fisher = masking::calibrate(cfg.method, cfg.model, pi0, cfg.masking, target, c.rel_tol,
                                                         c.gamma_low, c.gamma_high, c.max_steps);
  const masking::Calibration entropy = masking::calibrate(masking::MaskingMethod::MaxEntropy, cfg.model, pi0,
                                                          cfg.masking, target, c.rel_tol, c.gamma_low, c.gamma_high,
                                                          c.max_steps);
  covert::io::write_json_file(out_path(cfg, "fisher_plan.json"), plan_document(fisher));
  covert::io::write_json_file(out_path(cfg, "entropy_plan.json"), plan_document(entropy));

  const TransitionTensor fisher_truth = fisher.result.perturbed_transition.value_or(cfg.model.transition());
  const TransitionTensor& entropy_truth = cfg.model.transition();

  CsvWriter csv(out_path(cfg, "compare.csv"), {"method", "run", "N", "tv_error", "l1_error", "rows_used", "seed"});
  Series fisher_series{"Fisher masking", {}, {}};
  Series entropy_series{"max-entropy masking", {}, {}};
  json per_size = json::array();
  for (Index n_steps : cfg.adversary.sample_sizes) {
    std::vector<double> f_l1;
    std::vector<double> e_l1;
    std::vector<double> diff;
    for (int run = 0; run < cfg.adversary.runs; ++run) {
      const std::uint64_t seed = run_seed(cfg.masking.master_seed, n_steps, run);
      const AdversaryRun f = simulate(fisher_truth, fisher.result.masked_policy, n_steps, seed, run);
      const AdversaryRun e = simulate(entropy_truth, entropy.result.masked_policy, n_steps, seed, run);
      std::vector<std::string> fc = run_cells(f);
      fc.insert(fc.begin(), "fisher");
      csv.row(fc);
      std::vector<std::string> ec = run_cells(e);
      ec.insert(ec.begin(), "entropy");
      csv.row(ec);
      f_l1.push_back(f.error.l1);
      e_l1.push_back(e.error.l1);
      diff.push_back(f.error.l1 - e.error.l1);
    }
    const Stats fs_ = summarize(f_l1);
    const Stats es = summarize(e_l1);
    const Stats ds = summarize(diff);
    per_size.push_back({{"N", n_steps},
                        {"runs", cfg.adversary.runs},
                        {"fisher_mean_l1", fs_.mean},
                        {"fisher_stderr_l1", fs_.stderr_},
                        {"entropy_mean_l1", es.mean},
                        {"entropy_stderr_l1", es.stderr_},
                        {"mean_difference", ds.mean},
                        {"stderr_difference", ds.stderr_},
                        {"z", ds.stderr_ > 0.0 ? ds.mean / ds.stderr_ : 0.0}});
    fisher_series.x.push_back(static_cast<double>(n_steps));
    fisher_series.y.push_back(fs_.mean);
    entropy_series.x.push_back(static_cast<double>(n_steps));
    entropy_series.y.push_back(es.mean);
    std::printf("N=%lld  l1 error Fisher %.6g  max-entropy %.6g\n", static_cast<long long>(n_steps), fs_.mean, es.mean);
  }

  auto side = [](const masking::Calibration& cal) {
    return json{{"method", masking::to_string(cal.result.method)},
                {"pressure", cal.pressure},
                {"matched", cal.matched},
                {"evaluations", cal.evaluations},
                {"cost_perturbation_pct", 100.0 * cal.result.relative_cost_perturbation},
                {"log_det_paper", cal.result.log_det_paper}};
  };
  json report = {{"seed", cfg.masking.master_seed},
                 {"target_pct", c.target_pct},
                 {"fisher", side(fisher)},
                 {"entropy", side(entropy)},
                 {"sample_sizes", std::move(per_size)}};
  covert::io::write_json_file(out_path(cfg, "compare.json"), report);
  write_line_chart(out_path(cfg, "compare.svg"),
                   {"adversary error at matched cost perturbation", "N (samples)", "mean summed l1 error", true},
                   {fisher_series, entropy_series});
}

}  // namespace covertplan
