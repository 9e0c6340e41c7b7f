#include "covert/radar.hpp"

#include <algorithm>
#include <cmath>

#include "covert/error.hpp"

namespace covert::radar {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void ScenarioParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, "scenario: " + what); };
  if (!(sinr_min_db < sinr_max_db)) fail("sinr_min_db must be below sinr_max_db");
  if (n_states < 2) fail("n_states must be at least 2");
  if (!(chi > 0.0) || !std::isfinite(chi)) fail("chi must be positive");
  if (c_u.empty()) fail("c_u must name at least one action");
  if (t_u.size() != c_u.size()) fail("t_u and c_u must have one entry per action");
  if (!action_names.empty() && action_names.size() != c_u.size()) fail("action_names must have one entry per action");
  if (static_cast<Index>(k_i.size()) != n_states) fail("k_i must have one entry per state");
  for (double c : c_u) {
    if (!(c > 0.0) || !std::isfinite(c)) fail("every C_u must be positive");
  }
  for (double t : t_u) {
    if (!(t >= 0.0) || !std::isfinite(t)) fail("every t_u must be non-negative");
  }
  for (std::size_t i = 0; i < k_i.size(); ++i) {
    if (!(k_i[i] >= 0.0) || !std::isfinite(k_i[i])) fail("every K_i must be non-negative");
    if (i > 0 && k_i[i] < k_i[i - 1]) fail("K_i must be non-decreasing in the state index");
  }
}

VectorXd sinr_midpoints(const ScenarioParams& params) {
  const double width = (params.sinr_max_db - params.sinr_min_db) / static_cast<double>(params.n_states);
  VectorXd rho(params.n_states);
  for (Index i = 0; i < params.n_states; ++i) rho(i) = params.sinr_min_db + (static_cast<double>(i) + 0.5) * width;
  return rho;
}

MatrixXd build_cost(const ScenarioParams& params) {
  params.validate();
  const VectorXd rho = sinr_midpoints(params);
  MatrixXd cost(params.n_states, params.n_actions());
  for (Index i = 0; i < params.n_states; ++i) {
    const double scale = 1.0 - std::tanh(rho(i) / params.chi);
    for (Index u = 0; u < params.n_actions(); ++u) cost(i, u) = scale * params.c_u[static_cast<std::size_t>(u)];
  }
  return cost;
}

TransitionTensor build_transition(const ScenarioParams& params) {
  params.validate();
  const VectorXd rho = sinr_midpoints(params);
  const Index n = params.n_states;
  TransitionTensor p(n, params.n_actions());
  VectorXd logits(n);
  for (Index i = 0; i < n; ++i) {
    for (Index u = 0; u < params.n_actions(); ++u) {
      const double rate = params.k_i[static_cast<std::size_t>(i)] * params.t_u[static_cast<std::size_t>(u)];
      logits = rate * (rho(i) - rho.array());
      const VectorXd w = (logits.array() - logits.maxCoeff()).exp();
      p.row(i, u) = w / w.sum();
    }
  }
  return p;
}

MdpModel build_model(const ScenarioParams& params) { return MdpModel(build_transition(params), build_cost(params)); }

ScenarioParams paper_default_params(double chi) {
  ScenarioParams p;
  p.sinr_min_db = 0.0;
  p.sinr_max_db = 35.0;
  p.n_states = 10;
  p.chi = chi;
  p.c_u = {0.606, 0.407, 0.977, 0.465};
  p.k_i = {0.0040, 0.0210, 0.0960, 0.1310, 0.2130, 0.5020, 0.5280, 0.7910, 0.8450, 0.8500};
  p.t_u = {0.083, 0.413, 0.590, 0.928};
  p.action_names = {"Fine Scanning", "Coarse Scanning", "Fine Tracking", "Coarse Tracking"};
  return p;
}

std::pair<MdpModel, ScenarioParams> paper_default_scenario(double chi) {
  ScenarioParams params = paper_default_params(chi);
  return {build_model(params), std::move(params)};
}

}  // namespace covert::radar
