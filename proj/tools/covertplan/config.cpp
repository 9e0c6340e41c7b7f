#include "config.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "covert/error.hpp"
#include "covert/io.hpp"

namespace covertplan {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void reject_unknown(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
T field(const json& obj, const std::string& where, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

covert::masking::MaskingConfig parse_masking(const json& doc, covert::masking::MaskingMethod& method) {
  const std::string where = "masking";
  reject_unknown(doc, where,
                 {"method", "gamma", "gamma1", "gamma2", "bcd_threshold", "bcd_max_rounds", "monte_carlo_runs",
                  "starts_per_run", "master_seed", "floor", "solver_tol", "solver_max_iters"});
  covert::masking::MaskingConfig m;
  const std::string name = field<std::string>(doc, where, "method", covert::masking::to_string(method));
  try {
    method = covert::masking::parse_method(name);
  } catch (const covert::Error& e) {
    throw ConfigError(where + ".method: " + e.what());
  }
  m.gamma = field(doc, where, "gamma", m.gamma);
  m.gamma1 = field(doc, where, "gamma1", m.gamma1);
  m.gamma2 = field(doc, where, "gamma2", m.gamma2);
  m.bcd_threshold = field(doc, where, "bcd_threshold", m.bcd_threshold);
  m.bcd_max_rounds = field(doc, where, "bcd_max_rounds", m.bcd_max_rounds);
  m.monte_carlo_runs = field(doc, where, "monte_carlo_runs", m.monte_carlo_runs);
  m.starts_per_run = field(doc, where, "starts_per_run", m.starts_per_run);
  m.master_seed = field(doc, where, "master_seed", m.master_seed);
  m.floor = field(doc, where, "floor", m.floor);
  m.solver_tol = field(doc, where, "solver_tol", m.solver_tol);
  m.solver_max_iters = field(doc, where, "solver_max_iters", m.solver_max_iters);
  return m;
}

SweepSpec parse_sweep(const json& doc) {
  const std::string where = "sweep";
  reject_unknown(doc, where, {"parameter", "start_exponent", "end_exponent", "points", "values"});
  SweepSpec s;
  s.parameter = field(doc, where, "parameter", s.parameter);
  if (s.parameter != "gamma" && s.parameter != "gamma1" && s.parameter != "gamma2") {
    throw ConfigError("sweep.parameter must be gamma, gamma1 or gamma2");
  }
  s.start_exponent = field(doc, where, "start_exponent", s.start_exponent);
  s.end_exponent = field(doc, where, "end_exponent", s.end_exponent);
  s.points = field(doc, where, "points", s.points);
  s.values = field(doc, where, "values", s.values);
  if (s.values.empty() && s.points < 2) throw ConfigError("sweep.points must be at least 2");
  for (double v : s.values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("sweep.values must be finite and non-negative");
  }
  return s;
}

AdversarySpec parse_adversary(const json& doc) {
  const std::string where = "adversary";
  reject_unknown(doc, where, {"sample_sizes", "runs", "plan", "crb_steps", "crb_runs"});
  AdversarySpec a;
  a.sample_sizes = field(doc, where, "sample_sizes", a.sample_sizes);
  a.runs = field(doc, where, "runs", a.runs);
  a.plan = field(doc, where, "plan", a.plan);
  a.crb_steps = field(doc, where, "crb_steps", a.crb_steps);
  a.crb_runs = field(doc, where, "crb_runs", a.crb_runs);
  if (a.sample_sizes.empty()) throw ConfigError("adversary.sample_sizes must not be empty");
  for (covert::Index n : a.sample_sizes) {
    if (n < 1) throw ConfigError("adversary.sample_sizes must be positive");
  }
  if (a.runs < 1) throw ConfigError("adversary.runs must be at least 1");
  if (a.crb_runs != 0 && a.crb_runs < 2) throw ConfigError("adversary.crb_runs must be 0 (skip) or at least 2");
  if (a.crb_steps < 1) throw ConfigError("adversary.crb_steps must be positive");
  return a;
}

CompareSpec parse_compare(const json& doc) {
  const std::string where = "compare";
  reject_unknown(doc, where, {"target_pct", "rel_tol", "gamma_low", "gamma_high", "max_steps"});
  CompareSpec c;
  c.target_pct = field(doc, where, "target_pct", c.target_pct);
  c.rel_tol = field(doc, where, "rel_tol", c.rel_tol);
  c.gamma_low = field(doc, where, "gamma_low", c.gamma_low);
  c.gamma_high = field(doc, where, "gamma_high", c.gamma_high);
  c.max_steps = field(doc, where, "max_steps", c.max_steps);
  if (!(c.target_pct > 0.0)) throw ConfigError("compare.target_pct must be positive");
  if (!(c.rel_tol > 0.0)) throw ConfigError("compare.rel_tol must be positive");
  if (!(c.gamma_low > 0.0) || !(c.gamma_high > c.gamma_low)) {
    throw ConfigError("compare needs 0 < gamma_low < gamma_high");
  }
  if (c.max_steps < 1) throw ConfigError("compare.max_steps must be at least 1");
  return c;
}

}  // namespace

std::vector<double> SweepSpec::grid() const {
  if (!values.empty()) return values;
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) {
    const double e = start_exponent + (end_exponent - start_exponent) * k / (points - 1);
    out.push_back(std::pow(10.0, e));
  }
  return out;
}

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  reject_unknown(doc, "config", {"scenario", "model", "masking", "sweep", "adversary", "compare", "output_dir"});
  if (doc.contains("scenario") && doc.contains("model")) {
    throw ConfigError("config: give either 'scenario' or 'model', not both");
  }
  ExperimentConfig cfg{covert::radar::build_model(covert::radar::paper_default_params(10.0)),
                       std::nullopt,
                       covert::masking::MaskingMethod::TotalCost,
                       {},
                       {},
                       {},
                       {},
                       "out"};
  try {
    if (doc.contains("model")) {
      const json& m = doc.at("model");
      if (m.is_string()) {
        fs::path path = m.get<std::string>();
        if (path.is_relative()) path = fs::path(base_dir) / path;
        cfg.model = covert::io::model_from_json(covert::io::read_json_file(path.string()));
      } else {
        cfg.model = covert::io::model_from_json(m);
      }
    } else {
      const json scenario = doc.value("scenario", json::object());
      reject_unknown(scenario, "scenario",
                     {"preset", "chi", "sinr_min_db", "sinr_max_db", "n_states", "c_u", "k_i", "t_u", "action_names"});
      cfg.scenario = covert::io::scenario_from_json(scenario);
      cfg.model = covert::radar::build_model(*cfg.scenario);
    }
  } catch (const covert::Error& e) {
    throw ConfigError(e.what());
  }

  if (doc.contains("masking")) cfg.masking = parse_masking(doc.at("masking"), cfg.method);
  if (cfg.scenario) cfg.masking.chi = cfg.scenario->chi;
  try {
    cfg.masking.validate();
  } catch (const covert::Error& e) {
    throw ConfigError(e.what());
  }
  if (doc.contains("sweep")) cfg.sweep = parse_sweep(doc.at("sweep"));
  if (doc.contains("adversary")) cfg.adversary = parse_adversary(doc.at("adversary"));
  if (doc.contains("compare")) cfg.compare = parse_compare(doc.at("compare"));
  cfg.output_dir = field(doc, "config", "output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) throw ConfigError("config.output_dir must not be empty");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  json doc;
  try {
    doc = covert::io::read_json_file(path);
  } catch (const covert::Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(doc, fs::path(path).parent_path().string());
}

json describe(const ExperimentConfig& cfg) {
  const auto& m = cfg.masking;
  json out;
  if (cfg.scenario) {
    out["scenario"] = covert::io::to_json(*cfg.scenario);
  } else {
    out["model"] = covert::io::to_json(cfg.model);
  }
  out["masking"] = {{"method", covert::masking::to_string(cfg.method)},
                    {"gamma", m.gamma},
                    {"gamma1", m.gamma1},
                    {"gamma2", m.gamma2},
                    {"bcd_threshold", m.bcd_threshold},
                    {"bcd_max_rounds", m.bcd_max_rounds},
                    {"monte_carlo_runs", m.monte_carlo_runs},
                    {"starts_per_run", m.starts_per_run},
                    {"master_seed", m.master_seed},
                    {"floor", m.floor},
                    {"solver_tol", m.solver_tol},
                    {"solver_max_iters", m.solver_max_iters}};
  out["sweep"] = {{"parameter", cfg.sweep.parameter}, {"grid", cfg.sweep.grid()}};
  out["adversary"] = {{"sample_sizes", cfg.adversary.sample_sizes},
                      {"runs", cfg.adversary.runs},
                      {"crb_steps", cfg.adversary.crb_steps},
                      {"crb_runs", cfg.adversary.crb_runs}};
  out["compare"] = {{"target_pct", cfg.compare.target_pct},
                    {"rel_tol", cfg.compare.rel_tol},
                    {"gamma_low", cfg.compare.gamma_low},
                    {"gamma_high", cfg.compare.gamma_high},
                    {"max_steps", cfg.compare.max_steps}};
  return out;
}

}  // namespace covertplan
