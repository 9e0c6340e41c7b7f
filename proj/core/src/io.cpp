#include "covert/io.hpp"

#include <fstream>

#include "covert/error.hpp"

namespace covert::io {

using Eigen::MatrixXd;
using Eigen::VectorXd;

json to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

json to_json(const TransitionTensor& t) {
  json out = json::array();
  for (Index i = 0; i < t.n_states(); ++i) {
    json per_action = json::array();
    for (Index u = 0; u < t.n_actions(); ++u) per_action.push_back(to_json(VectorXd(t.row(i, u))));
    out.push_back(std::move(per_action));
  }
  return out;
}

MatrixXd matrix_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty() || !doc.front().is_array()) {
    throw Error(ErrorCode::InvalidArgument, "expected a non-empty array of rows");
  }
  const auto rows = static_cast<Index>(doc.size());
  const auto cols = static_cast<Index>(doc.front().size());
  MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const json& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorCode::InvalidArgument, "matrix rows differ in length");
    }
    for (Index j = 0; j < cols; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "matrix entries must be numbers");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

TransitionTensor transition_from_json(const json& doc) {
  if (!doc.is_array() || doc.empty() || !doc.front().is_array()) {
    throw Error(ErrorCode::InvalidArgument, "expected a states x actions x states array");
  }
  const auto n = static_cast<Index>(doc.size());
  const auto m = static_cast<Index>(doc.front().size());
  TransitionTensor t(n, m);
  for (Index i = 0; i < n; ++i) {
    const MatrixXd rows = matrix_from_json(doc[static_cast<std::size_t>(i)]);
    if (rows.rows() != m || rows.cols() != n) {
      throw Error(ErrorCode::InvalidArgument, "transition tensor is ragged");
    }
    for (Index u = 0; u < m; ++u) t.row(i, u) = rows.row(u).transpose();
  }
  return t;
}

json to_json(const MdpModel& model) {
  return {{"n_states", model.n_states()},
          {"n_actions", model.n_actions()},
          {"transition", to_json(model.transition())},
          {"cost", to_json(model.cost())}};
}

MdpModel model_from_json(const json& doc) {
  try {
    const Index n = doc.at("n_states").get<Index>();
    const Index m = doc.at("n_actions").get<Index>();
    if (n <= 0 || m <= 0) throw Error(ErrorCode::InvalidModel, "n_states and n_actions must be positive");
    const json& tr = doc.at("transition");
    const json& co = doc.at("cost");
    if (!tr.is_array() || static_cast<Index>(tr.size()) != n || !co.is_array() || static_cast<Index>(co.size()) != n) {
      throw Error(ErrorCode::InvalidModel, "transition and cost must have n_states rows");
    }
    TransitionTensor t(n, m);
    MatrixXd cost(n, m);
    for (Index i = 0; i < n; ++i) {
      const json& ti = tr.at(static_cast<std::size_t>(i));
      const json& ci = co.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(ti.size()) != m || static_cast<Index>(ci.size()) != m) {
        throw Error(ErrorCode::InvalidModel, "each state needs n_actions transition rows and costs");
      }
      for (Index u = 0; u < m; ++u) {
        const json& row = ti.at(static_cast<std::size_t>(u));
        if (static_cast<Index>(row.size()) != n) {
          throw Error(ErrorCode::InvalidModel, "each transition row needs n_states entries");
        }
        for (Index j = 0; j < n; ++j) t(i, u, j) = row.at(static_cast<std::size_t>(j)).get<double>();
        cost(i, u) = ci.at(static_cast<std::size_t>(u)).get<double>();
      }
    }
    return MdpModel(std::move(t), std::move(cost));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidModel, std::string("malformed model document: ") + e.what());
  }
}

json to_json(const FisherReport& report) {
  return {{"log_det_paper", report.log_det_paper},
          {"log_det_oracle", report.log_det_oracle},
          {"stationary", to_json(report.stationary)},
          {"marginal_term", report.marginal_term},
          {"transition_term", report.transition_term}};
}

json to_json(const optim::SolveTrace& trace) {
  return {{"status", optim::to_string(trace.status)},
          {"iterations", trace.iterations},
          {"final_kkt_residual", trace.final_kkt_residual},
          {"iterates_objective", trace.iterates_objective}};
}

json to_json(const masking::MaskingResult& r) {
  json runs = json::array();
  for (const auto& s : r.runs) {
    runs.push_back({{"best_start", s.best_start},
                    {"objective", s.objective},
                    {"log_det_paper", s.log_det_paper},
                    {"log_det_oracle", s.log_det_oracle},
                    {"relative_cost_perturbation", s.relative_cost_perturbation},
                    {"param_perturbation", s.param_perturbation},
                    {"status", optim::to_string(s.status)},
                    {"final_kkt_residual", s.final_kkt_residual}});
  }
  json rounds = json::array();
  for (const auto& b : r.rounds) rounds.push_back({{"objective", b.objective}, {"displacement", b.displacement}});
  json out = {{"method", masking::to_string(r.method)},
              {"masked_pi", to_json(r.masked_pi.as_matrix())},
              {"masked_policy", to_json(r.masked_policy.matrix())},
              {"reference_cost", r.reference_cost},
              {"total_cost_perturbation", r.total_cost_perturbation},
              {"relative_cost_perturbation", r.relative_cost_perturbation},
              {"param_perturbation", r.param_perturbation},
              {"log_det_paper", r.log_det_paper},
              {"log_det_oracle", r.log_det_oracle},
              {"mean_log_det_paper", r.mean_log_det_paper},
              {"mean_log_det_oracle", r.mean_log_det_oracle},
              {"mean_relative_cost_perturbation", r.mean_relative_cost_perturbation},
              {"mean_param_perturbation", r.mean_param_perturbation},
              {"best_run", r.best_run},
              {"best_objective", r.best_objective},
              {"trace", to_json(r.trace)},
              {"rounds", std::move(rounds)},
              {"runs", std::move(runs)}};
  if (r.perturbed_cost) out["perturbed_cost"] = to_json(*r.perturbed_cost);
  if (r.perturbed_transition) out["perturbed_transition"] = to_json(*r.perturbed_transition);
  return out;
}

json to_json(const adversary::CrbReport& r) {
  return {{"n_steps", r.n_steps},
          {"n_runs", r.n_runs},
          {"n_params", r.n_params},
          {"min_eigenvalue", r.min_eigenvalue},
          {"tolerance", r.tolerance},
          {"dominated", r.dominated},
          {"variance_ratios", to_json(r.variance_ratios)},
          {"truth", to_json(r.truth)},
          {"mean_estimate", to_json(r.mean_estimate)}};
}

json to_json(const radar::ScenarioParams& p) {
  return {{"sinr_min_db", p.sinr_min_db}, {"sinr_max_db", p.sinr_max_db}, {"n_states", p.n_states},
          {"chi", p.chi},                 {"c_u", p.c_u},                 {"k_i", p.k_i},
          {"t_u", p.t_u},                 {"action_names", p.action_names}};
}

radar::ScenarioParams scenario_from_json(const json& doc) {
  try {
    radar::ScenarioParams p = radar::paper_default_params(doc.value("chi", 10.0));
    if (doc.contains("preset") && doc.at("preset").get<std::string>() != "default") {
      throw Error(ErrorCode::InvalidArgument, "scenario: unknown preset '" + doc.at("preset").get<std::string>() + "'");
    }
    p.sinr_min_db = doc.value("sinr_min_db", p.sinr_min_db);
    p.sinr_max_db = doc.value("sinr_max_db", p.sinr_max_db);
    p.n_states = doc.value("n_states", p.n_states);
    p.c_u = doc.value("c_u", p.c_u);
    p.k_i = doc.value("k_i", p.k_i);
    p.t_u = doc.value("t_u", p.t_u);
    p.action_names = doc.value("action_names", p.action_names);
    if (doc.contains("c_u") && !doc.contains("action_names")) p.action_names.clear();
    p.validate();
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("scenario: ") + e.what());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << doc.dump(2) << '\n';
}

}  // namespace covert::io
