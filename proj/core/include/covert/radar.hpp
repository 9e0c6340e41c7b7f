#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "covert/mdp.hpp"

namespace covert::radar {

/// Multi-function radar mode-scheduling scenario. States are uniform SINR
/// bins over [sinr_min_db, sinr_max_db]; each bin is represented by its
/// midpoint.
struct ScenarioParams {
  double sinr_min_db = 0.0;
  double sinr_max_db = 35.0;
  Index n_states = 10;
  /// Rate at which cost falls off with SINR.
  double chi = 10.0;
  /// Per-action operation cost scale.
  std::vector<double> c_u;
  /// Per-state SINR confidence, non-decreasing in the bin index.
  std::vector<double> k_i;
  /// Per-action processing factor.
  std::vector<double> t_u;
  std::vector<std::string> action_names;

  Index n_actions() const { return static_cast<Index>(c_u.size()); }

  /// Throws InvalidArgument naming the violated condition.
  void validate() const;
};

/// Bin midpoints in dB.
Eigen::VectorXd sinr_midpoints(const ScenarioParams& params);

/// c[i][u] = (1 - tanh(rho_i / chi)) C_u.
Eigen::MatrixXd build_cost(const ScenarioParams& params);

/// P[i][u][j] = softmax_j(K_i t_u (rho_i - rho_j)).
TransitionTensor build_transition(const ScenarioParams& params);

MdpModel build_model(const ScenarioParams& params);

/// Ten 3.5 dB bins over 0-35 dB, four scan/track modes.
ScenarioParams paper_default_params(double chi = 10.0);

std::pair<MdpModel, ScenarioParams> paper_default_scenario(double chi = 10.0);

}  // namespace covert::radar
