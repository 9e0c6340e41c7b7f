#pragma once

#include <optional>
#include <string>

#include "config.hpp"

namespace covertplan {

/// Unmasked LP plan: plan.json and model.json.
void cmd_solve(const ExperimentConfig& cfg);

/// Masking sweep over cfg.sweep: sweep.csv plus two charts.
void cmd_sweep(const ExperimentConfig& cfg);

/// Adversary simulation against a plan file: adversary.csv and crb_report.json.
void cmd_adversary(const ExperimentConfig& cfg, const std::string& plan_path);

/// Fisher versus max-entropy masking at matched cost perturbation:
/// fisher_plan.json, entropy_plan.json, compare.csv, compare.json, compare.svg.
void cmd_compare(const ExperimentConfig& cfg);

}  // namespace covertplan
