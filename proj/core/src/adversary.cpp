#include "covert/adversary.hpp"

#include <cmath>

#include "covert/error.hpp"
#include "covert/fim.hpp"
#include "covert/markov.hpp"
#include "covert/rng.hpp"

namespace covert::adversary {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Row-wise cumulative sums for inverse-CDF sampling.
class Sampler {
 public:
  explicit Sampler(const MatrixXd& rows) : cdf_(rows.rows(), rows.cols()) {
    for (Index r = 0; r < rows.rows(); ++r) {
      double acc = 0.0;
      for (Index c = 0; c < rows.cols(); ++c) {
        acc += rows(r, c);
        cdf_(r, c) = acc;
      }
    }
  }

  Index draw(Index row, double u) const {
    const double target = u * cdf_(row, cdf_.cols() - 1);
    for (Index c = 0; c + 1 < cdf_.cols(); ++c) {
      if (target < cdf_(row, c)) return c;
    }
    return cdf_.cols() - 1;
  }

 private:
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cdf_;
};

MatrixXd transition_rows(const TransitionTensor& t) {
  MatrixXd rows(t.n_states() * t.n_actions(), t.n_states());
  for (Index i = 0; i < t.n_states(); ++i) {
    for (Index u = 0; u < t.n_actions(); ++u) rows.row(i * t.n_actions() + u) = t.row(i, u).transpose();
  }
  return rows;
}

}  // namespace

Index draw_index(const VectorXd& distribution, Rng& rng) {
  double u = rng.uniform() * distribution.sum();
  for (Index i = 0; i + 1 < distribution.size(); ++i) {
    if (u < distribution(i)) return i;
    u -= distribution(i);
  }
  return distribution.size() - 1;
}

Index draw_stationary_state(const TransitionTensor& transition, const Policy& policy, Rng& rng) {
  return draw_index(stationary_vector(transition.state_chain(policy.matrix())), rng);
}

TrajectorySample sample_trajectory(const TransitionTensor& transition, const Policy& policy, Index n_steps,
                                   std::uint64_t seed, Index x0) {
  const Index n = transition.n_states();
  const Index m = transition.n_actions();
  if (policy.n_states() != n || policy.n_actions() != m) {
    throw Error(ErrorCode::InvalidArgument, "policy shape differs from the model");
  }
  if (x0 < 0 || x0 >= n) throw Error(ErrorCode::InvalidArgument, "initial state out of range");
  if (n_steps < 0) throw Error(ErrorCode::InvalidArgument, "n_steps must be non-negative");

  const Sampler actions(policy.matrix());
  const Sampler next_state(transition_rows(transition));
  Rng rng(seed);

  TrajectorySample sample;
  sample.n_steps = n_steps;
  sample.seed = seed;
  sample.states.resize(static_cast<std::size_t>(n_steps + 1));
  sample.actions.resize(static_cast<std::size_t>(n_steps + 1));
  Index x = x0;
  for (Index k = 0; k <= n_steps; ++k) {
    const Index u = actions.draw(x, rng.uniform());
    sample.states[static_cast<std::size_t>(k)] = x;
    sample.actions[static_cast<std::size_t>(k)] = u;
    if (k < n_steps) x = next_state.draw(x * m + u, rng.uniform());
  }
  return sample;
}

TrajectorySample sample_trajectory(const MdpModel& model, const Policy& policy, Index n_steps, std::uint64_t seed,
                                   Index x0) {
  return sample_trajectory(model.transition(), policy, n_steps, seed, x0);
}

AdversaryEstimate mle_estimate(const TrajectorySample& sample, Index n_states, Index n_actions) {
  if (sample.states.size() < 2 || sample.states.size() != sample.actions.size()) {
    throw Error(ErrorCode::EmptySample, "trajectory has no transitions");
  }
  const Index s = n_states * n_actions;
  AdversaryEstimate est;
  est.n_states = n_states;
  est.n_actions = n_actions;
  est.visit_counts = MatrixXd::Zero(s, s);
  est.sample_size = static_cast<Index>(sample.states.size()) - 1;

  auto pair_index = [&](std::size_t k) {
    const Index x = sample.states[k];
    const Index u = sample.actions[k];
    if (x < 0 || x >= n_states || u < 0 || u >= n_actions) {
      throw Error(ErrorCode::InvalidArgument, "trajectory index out of range");
    }
    return x * n_actions + u;
  };
  Index from = pair_index(0);
  for (std::size_t k = 1; k < sample.states.size(); ++k) {
    const Index to = pair_index(k);
    est.visit_counts(from, to) += 1.0;
    from = to;
  }

  est.a_hat = MatrixXd::Zero(s, s);
  est.visited.assign(static_cast<std::size_t>(s), false);
  for (Index r = 0; r < s; ++r) {
    const double total = est.visit_counts.row(r).sum();
    if (total > 0.0) {
      est.a_hat.row(r) = est.visit_counts.row(r) / total;
      est.visited[static_cast<std::size_t>(r)] = true;
    }
  }
  return est;
}

ExtractedEstimates extract_estimates(const AdversaryEstimate& estimate, UnvisitedRows mode) {
  const Index n = estimate.n_states;
  const Index m = estimate.n_actions;
  ExtractedEstimates out{TransitionTensor(n, m), MatrixXd::Zero(n, m), estimate.visited,
                         std::vector<bool>(static_cast<std::size_t>(n), false)};
  for (Index r = 0; r < n * m; ++r) {
    if (!estimate.visited[static_cast<std::size_t>(r)]) {
      if (mode == UnvisitedRows::Reject) {
        throw Error(ErrorCode::UnvisitedRow, "state-action row " + std::to_string(r) + " was never visited");
      }
      continue;
    }
    for (Index j = 0; j < n; ++j) out.p_hat(r / m, r % m, j) = estimate.a_hat.row(r).segment(j * m, m).sum();
  }
  const VectorXd arrivals = estimate.visit_counts.colwise().sum().transpose();
  for (Index j = 0; j < n; ++j) {
    const double total = arrivals.segment(j * m, m).sum();
    if (total <= 0.0) continue;
    out.policy_hat.row(j) = arrivals.segment(j * m, m).transpose() / total;
    out.visited_states[static_cast<std::size_t>(j)] = true;
  }
  return out;
}

TvError tv_error(const TransitionTensor& p_hat, const TransitionTensor& p_true, const std::vector<bool>* rows) {
  if (p_hat.n_states() != p_true.n_states() || p_hat.n_actions() != p_true.n_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "transition tensors differ in shape");
  }
  const Index n_rows = p_true.n_states() * p_true.n_actions();
  if (rows && static_cast<Index>(rows->size()) != n_rows) {
    throw Error(ErrorCode::DimensionMismatch, "row mask length differs from the number of rows");
  }
  TvError err;
  for (Index r = 0; r < n_rows; ++r) {
    if (rows && !(*rows)[static_cast<std::size_t>(r)]) continue;
    const Index i = r / p_true.n_actions();
    const Index u = r % p_true.n_actions();
    err.l1 += (p_hat.row(i, u) - p_true.row(i, u)).lpNorm<1>();
    ++err.rows_used;
  }
  err.tv = 0.5 * err.l1;
  return err;
}

CrbReport crb_check(const TransitionTensor& transition, const Policy& policy, Index n_steps, int n_runs,
                    std::uint64_t seed) {
  if (policy.matrix().minCoeff() <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "Cramer-Rao check needs a strictly positive policy");
  }
  if (n_runs < 2 || n_steps < 1) throw Error(ErrorCode::InvalidArgument, "need at least 2 runs and 1 step");
  const Index n = transition.n_states();
  const Index m = transition.n_actions();
  const Index s = n * m;
  const Index p = s - 1;

  const OccupationMeasure occ = occupation_from_policy(transition, policy);
  const AugmentedChain chain = augment(transition, occ);
  const VectorXd state_dist = stationary_vector(transition.state_chain(policy.matrix()));

  CrbReport rep;
  rep.n_steps = n_steps;
  rep.n_runs = n_runs;
  rep.n_params = s * p;
  rep.truth.resize(rep.n_params);
  for (Index r = 0; r < s; ++r) rep.truth.segment(r * p, p) = chain.matrix().row(r).head(p).transpose();

  rep.crb = MatrixXd::Zero(rep.n_params, rep.n_params);
  const BlockDiagonalFim fim = assemble_fim(chain);
  for (Index r = 0; r < s; ++r) {
    rep.crb.block(r * p, r * p, p, p) = fim.blocks[static_cast<std::size_t>(r)].llt().solve(MatrixXd::Identity(p, p));
  }

  MatrixXd estimates(n_runs, rep.n_params);
  for (int run = 0; run < n_runs; ++run) {
    const std::uint64_t run_seed = stream_seed(seed, static_cast<std::uint64_t>(run));
    Rng start_rng(stream_seed(run_seed, 0xC0FFEEULL));
    const Index x0 = draw_index(state_dist, start_rng);
    const AdversaryEstimate est = mle_estimate(sample_trajectory(transition, policy, n_steps, run_seed, x0), n, m);
    for (Index r = 0; r < s; ++r) {
      if (!est.visited[static_cast<std::size_t>(r)]) {
        throw Error(ErrorCode::UnvisitedRow, "run " + std::to_string(run) + " never left pair " + std::to_string(r));
      }
      estimates.row(run).segment(r * p, p) = est.a_hat.row(r).head(p);
    }
  }

  rep.mean_estimate = estimates.colwise().mean().transpose();
  const MatrixXd centered = estimates.rowwise() - rep.mean_estimate.transpose();
  rep.scaled_covariance =
      static_cast<double>(n_steps) * (centered.transpose() * centered) / static_cast<double>(n_runs - 1);

  const Eigen::SelfAdjointEigenSolver<MatrixXd> gap(rep.scaled_covariance - rep.crb, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = gap.eigenvalues().minCoeff();
  const Eigen::SelfAdjointEigenSolver<MatrixXd> crb_eig(rep.crb, Eigen::EigenvaluesOnly);
  rep.tolerance = 3.0 * crb_eig.eigenvalues().cwiseAbs().maxCoeff() * std::sqrt(2.0 / static_cast<double>(n_runs - 1));
  rep.variance_ratios = rep.scaled_covariance.diagonal().cwiseQuotient(rep.crb.diagonal());
  rep.dominated = rep.min_eigenvalue >= -rep.tolerance;
  return rep;
}

CrbReport crb_check(const MdpModel& model, const Policy& policy, Index n_steps, int n_runs, std::uint64_t seed) {
  return crb_check(model.transition(), policy, n_steps, n_runs, seed);
}

}  // namespace covert::adversary
