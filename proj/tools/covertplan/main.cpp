#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"
#include "config.hpp"
#include "covert/error.hpp"
#include "covert/masking.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Overrides {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  std::string method;
  std::string plan;
};

covertplan::ExperimentConfig load(const Overrides& o, const CLI::App& sub) {
  covertplan::ExperimentConfig cfg = covertplan::load_config(o.config_path);
  if (sub.count("--seed")) cfg.masking.master_seed = o.seed;
  if (sub.count("--out")) cfg.output_dir = o.out;
  if (!o.method.empty()) {
    try {
      cfg.method = covert::masking::parse_method(o.method);
    } catch (const covert::Error& e) {
      throw covertplan::ConfigError(e.what());
    }
  }
  return cfg;
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "experiment configuration (JSON)")->required();
  sub->add_option("--seed", o.seed, "master seed, overrides masking.master_seed");
  sub->add_option("--out", o.out, "output directory, overrides output_dir");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fisher-information masking of MDP sensing plans"};
  app.require_subcommand(1);
  Overrides o;

  CLI::App* solve = app.add_subcommand("solve", "unmasked average-cost plan");
  add_common(solve, o);
  CLI::App* sweep = app.add_subcommand("sweep", "masking sweep over a log-spaced grid");
  add_common(sweep, o);
  sweep->add_option("--method", o.method, "total | cost | transition | entropy (default: masking.method)");
  CLI::App* adv = app.add_subcommand("adversary", "simulate the estimating adversary against a plan");
  add_common(adv, o);
  adv->add_option("--plan", o.plan, "plan file (default: adversary.plan, then <out>/plan.json)");
  CLI::App* compare = app.add_subcommand("compare", "Fisher vs max-entropy masking at matched cost perturbation");
  add_common(compare, o);
  compare->add_option("--method", o.method, "Fisher-side method (default: masking.method)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (solve->parsed()) {
      covertplan::cmd_solve(load(o, *solve));
    } else if (sweep->parsed()) {
      covertplan::cmd_sweep(load(o, *sweep));
    } else if (adv->parsed()) {
      const covertplan::ExperimentConfig cfg = load(o, *adv);
      std::string plan = o.plan;
      if (plan.empty()) plan = cfg.adversary.plan;
      if (plan.empty()) plan = (std::filesystem::path(cfg.output_dir) / "plan.json").string();
      covertplan::cmd_adversary(cfg, plan);
    } else if (compare->parsed()) {
      covertplan::cmd_compare(load(o, *compare));
    }
  } catch (const covertplan::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
