#include <cmath>
#include <functional>

#include "doctest.h"

#include "covert/adversary.hpp"
#include "covert/error.hpp"
#include "covert/fim.hpp"
#include "covert/markov.hpp"
#include "covert/radar.hpp"
#include "fixtures.hpp"

using covert::Error;
using covert::ErrorCode;
using covert::Policy;
using covert::TransitionTensor;
using namespace covert::adversary;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

TransitionTensor half_chain() {
  TransitionTensor t(2, 1);
  t.flat().setConstant(0.5);
  return t;
}

TrajectorySample manual(std::vector<Index> states, std::vector<Index> actions) {
  TrajectorySample s;
  s.n_steps = static_cast<Index>(states.size()) - 1;
  s.states = std::move(states);
  s.actions = std::move(actions);
  return s;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  Moments m;
  for (double x : v) m.mean += x / n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double x : v) {
    const double d = x - m.mean;
    m2 += d * d / n;
    m3 += d * d * d / n;
    m4 += d * d * d * d / n;
  }
  m.sd = std::sqrt(m2 * n / (n - 1.0));
  m.skewness = m3 / std::pow(m2, 1.5);
  m.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return m;
}

}  // namespace

TEST_SUITE("adversary") {
  TEST_CASE("single-state model stays put") {
    TransitionTensor t(1, 2);
    t.flat().setOnes();
    const auto s = sample_trajectory(t, Policy(MatrixXd::Constant(1, 2, 0.5)), 200, 3, 0);
    CHECK(s.states.size() == 201);
    CHECK(s.actions.size() == 201);
    for (Index x : s.states) CHECK(x == 0);
  }

  TEST_CASE("near-deterministic chain follows its dominant path") {
    constexpr Index n = 10;
    constexpr double eps = 1e-12;
    TransitionTensor t(n, 1);
    for (Index i = 0; i < n; ++i) {
      t.row(i, 0).setConstant(eps);
      t(i, 0, (i + 1) % n) = 1.0 - 9.0 * eps;
    }
    const auto s = sample_trajectory(t, Policy(MatrixXd::Ones(n, 1)), 1000, 17, 4);
    for (std::size_t k = 0; k < s.states.size(); ++k) CHECK(s.states[k] == static_cast<Index>((4 + k) % n));
  }

  TEST_CASE("trajectories are reproducible and sized N+1") {
    covert::Rng rng(50);
    const TransitionTensor t = fixture::random_transition(rng, 4, 3);
    const Policy mu(fixture::random_policy(rng, 4, 3));
    const auto a = sample_trajectory(t, mu, 500, 123, 2);
    const auto b = sample_trajectory(t, mu, 500, 123, 2);
    CHECK(a.states == b.states);
    CHECK(a.actions == b.actions);
    CHECK(a.states.size() == 501);
    CHECK(a.seed == 123);
    CHECK(a.states.front() == 2);
  }

  TEST_CASE("empirical pair frequencies match the occupation measure") {
    covert::Rng rng(51);
    // Nearly uniform rows keep the chain close to independent draws, so
    // binomial bands apply.
    const TransitionTensor t = fixture::random_transition(rng, 4, 3, 3.0);
    const MatrixXd mu = fixture::random_policy(rng, 4, 3);
    const VectorXd pi = fixture::occupation_of(t, mu);
    constexpr Index n_steps = 1000000;
    const auto s = sample_trajectory(t, Policy(mu), n_steps, 9, 0);
    VectorXd freq = VectorXd::Zero(12);
    for (std::size_t k = 0; k < s.states.size(); ++k) freq(s.states[k] * 3 + s.actions[k]) += 1.0;
    freq /= static_cast<double>(s.states.size());
    for (Index e = 0; e < 12; ++e) {
      const double sigma = std::sqrt(pi(e) * (1.0 - pi(e)) / static_cast<double>(n_steps));
      CHECK(std::abs(freq(e) - pi(e)) <= 3.0 * sigma);
    }
  }

  TEST_CASE("counting examples") {
    const auto est = mle_estimate(manual({0, 1, 0, 1, 0}, {0, 0, 0, 0, 0}), 2, 1);
    MatrixXd expected(2, 2);
    expected << 0, 1, 1, 0;
    CHECK(est.a_hat == expected);
    CHECK(est.sample_size == 4);

    const auto one = mle_estimate(manual({1, 0}, {1, 0}), 2, 2);
    CHECK(one.a_hat.sum() == 1.0);
    CHECK(one.a_hat(3, 0) == 1.0);
    CHECK(one.visited[3]);
    CHECK_FALSE(one.visited[0]);
  }

  TEST_CASE("visited rows are distributions") {
    covert::Rng rng(52);
    const TransitionTensor t = fixture::random_transition(rng, 3, 2);
    const auto s = sample_trajectory(t, Policy(fixture::random_policy(rng, 3, 2)), 5000, 4, 1);
    const auto est = mle_estimate(s, 3, 2);
    const auto ext = extract_estimates(est);
    for (Index r = 0; r < 6; ++r) {
      if (!est.visited[static_cast<std::size_t>(r)]) continue;
      CHECK(std::abs(est.a_hat.row(r).sum() - 1.0) < 1e-12);
      CHECK(std::abs(ext.p_hat.row(r / 2, r % 2).sum() - 1.0) < 1e-12);
    }
    CHECK(est.visit_counts.sum() == 5000.0);
  }

  TEST_CASE("binomial concentration of the estimate") {
    covert::Rng rng(53);
    const TransitionTensor t = fixture::random_transition(rng, 3, 2);
    const MatrixXd mu = fixture::random_policy(rng, 3, 2);
    const VectorXd pi = fixture::occupation_of(t, mu);
    const MatrixXd a = covert::augment(t, covert::OccupationMeasure(3, 2, pi)).matrix();
    const auto est = mle_estimate(sample_trajectory(t, Policy(mu), 100000, 8, 0), 3, 2);
    const VectorXd visits = est.visit_counts.rowwise().sum();
    CHECK((est.a_hat - a).cwiseAbs().maxCoeff() <= 5.0 * std::sqrt(1.0 / visits.minCoeff()));
  }

  TEST_CASE("inversion of an exact augmented chain is the identity") {
    covert::Rng rng(54);
    for (int trial = 0; trial < 30; ++trial) {
      const Index n = 2 + trial % 4;
      const Index m = 1 + trial % 3;
      const TransitionTensor t = fixture::random_transition(rng, n, m);
      const MatrixXd mu = fixture::random_policy(rng, n, m);
      const VectorXd pi = fixture::occupation_of(t, mu);
      AdversaryEstimate est;
      est.n_states = n;
      est.n_actions = m;
      est.a_hat = covert::augment(t, covert::OccupationMeasure(n, m, pi)).matrix();
      // Expected transition counts of a long run.
      est.visit_counts = 1e6 * pi.asDiagonal() * est.a_hat;
      est.visited.assign(static_cast<std::size_t>(n * m), true);
      const auto ext = extract_estimates(est, UnvisitedRows::Reject);
      CHECK((ext.p_hat.flat() - t.flat()).lpNorm<Eigen::Infinity>() < 1e-12);
      CHECK((ext.policy_hat - mu).lpNorm<Eigen::Infinity>() < 1e-12);
      if (m == 1) {
        for (Index i = 0; i < n; ++i) CHECK((ext.p_hat.row(i, 0) - est.a_hat.row(i).transpose()).lpNorm<Eigen::Infinity>() == 0.0);
      }
    }
  }

  TEST_CASE("total variation examples") {
    covert::Rng rng(55);
    const TransitionTensor t = fixture::random_transition(rng, 3, 2);
    CHECK(tv_error(t, t).tv == 0.0);
    TransitionTensor moved = t;
    const double shift = std::min(0.1, t(1, 1, 0));
    moved(1, 1, 0) -= shift;
    moved(1, 1, 2) += shift;
    const TvError e = tv_error(moved, t);
    CHECK(e.tv == doctest::Approx(shift).epsilon(1e-12));
    CHECK(e.l1 == doctest::Approx(2.0 * shift).epsilon(1e-12));
    CHECK(e.rows_used == 6);
    std::vector<bool> rows(6, true);
    rows[3] = false;
    CHECK(tv_error(moved, t, &rows).tv == 0.0);
    CHECK(tv_error(moved, t, &rows).rows_used == 5);
    CHECK(code_of([&] { tv_error(TransitionTensor(3, 1), t); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("estimation error shrinks at the square-root rate") {
    const auto model = covert::radar::paper_default_scenario(10.0).first;
    const Policy uniform(MatrixXd::Constant(10, 4, 0.25));
    const VectorXd start = covert::stationary_vector(model.transition().state_chain(uniform.matrix()));
    std::vector<double> means;
    for (Index n_steps : {1000, 10000, 100000}) {
      double total = 0.0;
      constexpr int runs = 50;
      for (int run = 0; run < runs; ++run) {
        covert::Rng rng(covert::stream_seed(60, static_cast<std::uint64_t>(n_steps), static_cast<std::uint64_t>(run)));
        const Index x0 = draw_index(start, rng);
        const auto est = mle_estimate(sample_trajectory(model, uniform, n_steps, rng.next_u64(), x0), 10, 4);
        const auto ext = extract_estimates(est);
        const TvError e = tv_error(ext.p_hat, model.transition(), &ext.visited_rows);
        CHECK(e.tv > 0.0);
        total += e.tv / runs;
      }
      means.push_back(total);
    }
    CHECK(means[0] > means[1]);
    CHECK(means[1] > means[2]);
    const double ratio = means[2] / means[1];
    CHECK(ratio > 0.25);
    CHECK(ratio < 0.40);
  }

  TEST_CASE("Cramer-Rao bound on the symmetric two-state chain") {
    const CrbReport rep = crb_check(half_chain(), Policy(MatrixXd::Ones(2, 1)), 20000, 400, 70);
    REQUIRE(rep.n_params == 2);
    CHECK(rep.crb(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(std::abs(rep.variance_ratios(0) - 1.0) < 0.15);
    CHECK(rep.dominated);
    CHECK(rep.min_eigenvalue >= -rep.tolerance);
    CHECK(rep.tolerance == doctest::Approx(3.0 * 0.5 * std::sqrt(2.0 / 399.0)));
  }

  TEST_CASE("Cramer-Rao dominance on a random chain") {
    covert::Rng rng(56);
    const TransitionTensor t = fixture::random_transition(rng, 2, 2, 0.3);
    const CrbReport rep = crb_check(t, Policy(fixture::random_policy(rng, 2, 2)), 20000, 300, 71);
    CHECK(rep.n_params == 12);
    CHECK(rep.dominated);
    CHECK((rep.variance_ratios.array() > 0.7).all());
    CHECK((rep.variance_ratios.array() < 1.3).all());
  }

  TEST_CASE("bias is negligible against the spread") {
    const TransitionTensor t = half_chain();
    const Policy one(MatrixXd::Ones(2, 1));
    for (Index n_steps : {1000, 10000, 100000}) {
      const CrbReport rep = crb_check(t, one, n_steps, 200, 72 + static_cast<std::uint64_t>(n_steps));
      const double sd = std::sqrt(rep.scaled_covariance(0, 0) / static_cast<double>(n_steps));
      CAPTURE(n_steps);
      CHECK(std::abs(rep.mean_estimate(0) - 0.5) <= 4.0 * sd / std::sqrt(200.0));
    }
  }

  TEST_CASE("standardised errors look normal") {
    const TransitionTensor t = half_chain();
    const Policy one(MatrixXd::Ones(2, 1));
    constexpr Index n_steps = 100000;
    std::vector<double> z;
    for (int run = 0; run < 1000; ++run) {
      const auto est = mle_estimate(sample_trajectory(t, one, n_steps, covert::stream_seed(80, run), run % 2), 2, 1);
      // Asymptotic standard deviation of sqrt(N)(a_hat - a): sqrt(a(1-a)/pi_m).
      z.push_back(std::sqrt(static_cast<double>(n_steps)) * (est.a_hat(0, 0) - 0.5) / std::sqrt(0.25 / 0.5));
    }
    const Moments m = moments(z);
    CHECK(std::abs(m.skewness) < 0.2);
    CHECK(std::abs(m.excess_kurtosis) < 0.5);
    CHECK(std::abs(m.sd - 1.0) < 0.1);
  }

  TEST_CASE("sampling helpers") {
    covert::Rng rng(57);
    VectorXd p(3);
    p << 0.2, 0.5, 0.3;
    VectorXd freq = VectorXd::Zero(3);
    constexpr int draws = 100000;
    for (int k = 0; k < draws; ++k) freq(draw_index(p, rng)) += 1.0 / draws;
    CHECK((freq - p).lpNorm<Eigen::Infinity>() < 0.01);
    VectorXd spike = VectorXd::Zero(4);
    spike(2) = 1.0;
    for (int k = 0; k < 100; ++k) CHECK(draw_index(spike, rng) == 2);
  }

  TEST_CASE("errors") {
    const TransitionTensor t = half_chain();
    const Policy one(MatrixXd::Ones(2, 1));
    CHECK(code_of([&] { mle_estimate(sample_trajectory(t, one, 0, 1, 0), 2, 1); }) == ErrorCode::EmptySample);
    CHECK(code_of([&] { sample_trajectory(t, one, 10, 1, 2); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([&] { sample_trajectory(t, Policy(MatrixXd::Constant(2, 2, 0.5)), 10, 1, 0); }) ==
          ErrorCode::InvalidArgument);
    CHECK(code_of([&] { mle_estimate(manual({0, 3}, {0, 0}), 2, 1); }) == ErrorCode::InvalidArgument);
    const auto partial = mle_estimate(manual({0, 0, 1}, {0, 1, 0}), 2, 2);
    CHECK(code_of([&] { extract_estimates(partial, UnvisitedRows::Reject); }) == ErrorCode::UnvisitedRow);
    const auto flagged = extract_estimates(partial);
    CHECK(flagged.p_hat.row(1, 1).sum() == 0.0);
    CHECK(code_of([&] { crb_check(t, Policy(MatrixXd::Ones(2, 1)), 10, 1, 0); }) == ErrorCode::InvalidArgument);
    MatrixXd zero_entry(2, 2);
    zero_entry << 1, 0, 0.5, 0.5;
    covert::TransitionTensor t2(2, 2);
    t2.flat().setConstant(0.5);
    CHECK(code_of([&] { crb_check(t2, Policy(zero_entry), 10, 5, 0); }) == ErrorCode::InvalidArgument);
  }
}
