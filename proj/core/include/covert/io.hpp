#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "covert/adversary.hpp"
#include "covert/fim.hpp"
#include "covert/masking.hpp"
#include "covert/mdp.hpp"
#include "covert/optim.hpp"
#include "covert/radar.hpp"

namespace covert::io {

using nlohmann::json;

json to_json(const Eigen::VectorXd& v);
json to_json(const Eigen::MatrixXd& m);
json to_json(const TransitionTensor& t);

/// Inverses of the writers above. Throw InvalidArgument on ragged or
/// non-numeric input.
Eigen::MatrixXd matrix_from_json(const json& doc);
TransitionTensor transition_from_json(const json& doc);

/// {"n_states", "n_actions", "transition": [[[...]]], "cost": [[...]]}
json to_json(const MdpModel& model);
/// Throws InvalidModel for malformed documents or violated invariants.
MdpModel model_from_json(const json& doc);

json to_json(const FisherReport& report);
json to_json(const optim::SolveTrace& trace);
json to_json(const masking::MaskingResult& result);
json to_json(const adversary::CrbReport& report);

json to_json(const radar::ScenarioParams& params);
/// Missing fields fall back to paper_default_params(). Throws InvalidArgument.
radar::ScenarioParams scenario_from_json(const json& doc);

/// Reads and parses a JSON file. Throws InvalidArgument on I/O or syntax errors.
json read_json_file(const std::string& path);
/// Writes `doc` with two-space indentation and a trailing newline.
void write_json_file(const std::string& path, const json& doc);

}  // namespace covert::io
