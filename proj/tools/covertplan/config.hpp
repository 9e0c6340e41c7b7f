#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "covert/masking.hpp"
#include "covert/mdp.hpp"
#include "covert/radar.hpp"

namespace covertplan {

/// Thrown for anything wrong with the configuration; maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepSpec {
  /// "gamma", "gamma1" or "gamma2".
  std::string parameter = "gamma";
  double start_exponent = -3.0;
  double end_exponent = -1.0;
  int points = 10;
  /// Explicit grid; overrides the exponents when non-empty.
  std::vector<double> values;

  std::vector<double> grid() const;
};

struct AdversarySpec {
  std::vector<covert::Index> sample_sizes{10000};
  int runs = 100;
  /// Plan file; empty means <output_dir>/plan.json.
  std::string plan;
  covert::Index crb_steps = 100000;
  int crb_runs = 200;
};

struct CompareSpec {
  /// Target relative cost perturbation in percent.
  double target_pct = 20.0;
  double rel_tol = 0.005;
  double gamma_low = 1e-6;
  double gamma_high = 1.0;
  int max_steps = 60;
};

struct ExperimentConfig {
  covert::MdpModel model;
  std::optional<covert::radar::ScenarioParams> scenario;
  covert::masking::MaskingMethod method = covert::masking::MaskingMethod::TotalCost;
  covert::masking::MaskingConfig masking;
  SweepSpec sweep;
  AdversarySpec adversary;
  CompareSpec compare;
  std::string output_dir = "out";
};

/// Parses and validates a configuration document. `base_dir` resolves a
/// relative model path. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir);
ExperimentConfig load_config(const std::string& path);

/// Effective configuration, written next to the outputs.
nlohmann::json describe(const ExperimentConfig& cfg);

}  // namespace covertplan
