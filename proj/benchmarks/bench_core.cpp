#include <benchmark/benchmark.h>

#include "covert/fim.hpp"
#include "covert/masking.hpp"
#include "covert/mdp.hpp"
#include "covert/optim.hpp"
#include "covert/radar.hpp"
#include "covert/rng.hpp"

namespace {

using covert::Index;
using Eigen::VectorXd;

const covert::MdpModel& radar_model() {
  static const covert::MdpModel model = covert::radar::paper_default_scenario(10.0).first;
  return model;
}

covert::MdpModel random_model(Index n, Index m, std::uint64_t seed) {
  covert::Rng rng(seed);
  covert::TransitionTensor t(n, m);
  Eigen::MatrixXd cost(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index u = 0; u < m; ++u) {
      VectorXd row(n);
      for (Index j = 0; j < n; ++j) row(j) = 0.02 + rng.exponential();
      t.row(i, u) = row / row.sum();
      cost(i, u) = rng.uniform();
    }
  }
  return {t, cost};
}

void BM_AverageCostLp(benchmark::State& state) {
  const Index n = state.range(0);
  const covert::MdpModel model = random_model(n, 4, 7);
  for (auto _ : state) benchmark::DoNotOptimize(covert::solve_average_cost_lp(model));
}
BENCHMARK(BM_AverageCostLp)->Arg(5)->Arg(10)->Arg(20)->Arg(40);

void BM_FlowProjection(benchmark::State& state) {
  const covert::MdpModel& model = radar_model();
  covert::optim::Projector projector(covert::flow_constraints(model.transition(), 1e-9));
  covert::Rng rng(3);
  VectorXd z(model.n_pairs());
  for (Index k = 0; k < z.size(); ++k) z(k) = rng.uniform() / 20.0;
  const bool warm = state.range(0) != 0;
  for (auto _ : state) {
    if (!warm) projector.reset_warm_start();
    benchmark::DoNotOptimize(projector(z));
  }
}
BENCHMARK(BM_FlowProjection)->Arg(0)->Arg(1);

void BM_TotalCostMaskingSingleRun(benchmark::State& state) {
  const covert::MdpModel& model = radar_model();
  const covert::OccupationMeasure pi0 = covert::solve_average_cost_lp(model);
  covert::masking::MaskingConfig cfg;
  cfg.gamma = 1.5e-3;
  cfg.monte_carlo_runs = 1;
  cfg.starts_per_run = 1;
  for (auto _ : state) benchmark::DoNotOptimize(covert::masking::mask_total_cost(model, pi0, cfg));
}
BENCHMARK(BM_TotalCostMaskingSingleRun)->Unit(benchmark::kMillisecond);

void BM_FisherReport(benchmark::State& state) {
  const covert::MdpModel& model = radar_model();
  const Index n = model.n_states();
  const Index m = model.n_actions();
  const covert::Policy uniform_policy(Eigen::MatrixXd::Constant(n, m, 1.0 / static_cast<double>(m)));
  const covert::OccupationMeasure uniform = covert::occupation_from_policy(model.transition(), uniform_policy);
  for (auto _ : state) benchmark::DoNotOptimize(covert::fisher_report(model, uniform));
}
BENCHMARK(BM_FisherReport);

void BM_AssembleFim(benchmark::State& state) {
  covert::Rng rng(5);
  const Index s = state.range(0);
  Eigen::MatrixXd a(s, s);
  for (Index r = 0; r < s; ++r) {
    for (Index c = 0; c < s; ++c) a(r, c) = 0.05 + rng.exponential();
    a.row(r) /= a.row(r).sum();
  }
  const covert::AugmentedChain chain(a);
  for (auto _ : state) benchmark::DoNotOptimize(covert::assemble_fim(chain));
}
BENCHMARK(BM_AssembleFim)->Arg(8)->Arg(40);

}  // namespace

BENCHMARK_MAIN();
