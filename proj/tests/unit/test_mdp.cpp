#include <cmath>
#include <functional>

#include "doctest.h"

#include "covert/error.hpp"
#include "covert/mdp.hpp"
#include "covert/radar.hpp"
#include "fixtures.hpp"

using covert::Error;
using covert::ErrorCode;
using covert::MdpModel;
using covert::OccupationMeasure;
using covert::TransitionTensor;
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

TransitionTensor uniform_transition(Index n, Index m) {
  TransitionTensor t(n, m);
  t.flat().setConstant(1.0 / static_cast<double>(n));
  return t;
}

}  // namespace

TEST_SUITE("mdp") {
  TEST_CASE("single action uniform chain") {
    MatrixXd cost(2, 1);
    cost << 1, 3;
    const MdpModel model(uniform_transition(2, 1), cost);
    const OccupationMeasure pi = covert::solve_average_cost_lp(model);
    CHECK(pi(0, 0) == doctest::Approx(0.5));
    CHECK(pi(1, 0) == doctest::Approx(0.5));
    CHECK(covert::average_cost(pi, model) == doctest::Approx(2.0));
  }

  TEST_CASE("dominated action gets no mass") {
    covert::Rng rng(9);
    const TransitionTensor base = fixture::random_transition(rng, 3, 1);
    TransitionTensor t(3, 2);
    for (Index i = 0; i < 3; ++i) {
      t.row(i, 0) = base.row(i, 0);
      t.row(i, 1) = base.row(i, 0);
    }
    MatrixXd cost(3, 2);
    cost << 1, 2, 0.5, 1.5, 2, 3;
    const MdpModel model(t, cost);
    const OccupationMeasure pi = covert::solve_average_cost_lp(model);
    for (Index i = 0; i < 3; ++i) CHECK(pi(i, 1) == doctest::Approx(0.0));
    MatrixXd single_cost = cost.col(0);
    const double single = covert::average_cost(covert::solve_average_cost_lp(MdpModel(base, single_cost)), single_cost);
    CHECK(covert::average_cost(pi, model) == doctest::Approx(single).epsilon(1e-12));
  }

  TEST_CASE("LP, value iteration and enumeration agree on random models") {
    covert::Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
      const MdpModel model = fixture::random_model(rng, 5, 3);
      const OccupationMeasure pi = covert::solve_average_cost_lp(model);
      const double lp = covert::average_cost(pi, model);
      CAPTURE(trial);
      CHECK(std::abs(lp - covert::relative_value_iteration(model)) < 1e-6);
      if (trial % 10 == 0) {
        const double brute = oracle::brute_force_average_cost(fixture::rows_of(model.transition()), model.cost_flat(), 5, 3);
        CHECK(std::abs(lp - brute) < 1e-9);
      }
      CHECK_NOTHROW(covert::check_occupation(pi, model.transition()));
    }
  }

  TEST_CASE("larger models solve and agree with value iteration") {
    covert::Rng rng(12);
    for (Index n : {20, 40, 60}) {
      const MdpModel model = fixture::random_model(rng, n, 4);
      const OccupationMeasure pi = covert::solve_average_cost_lp(model);
      CAPTURE(n);
      CHECK(std::abs(covert::average_cost(pi, model) - covert::relative_value_iteration(model)) < 1e-6);
      CHECK(covert::flow_residual(pi, model.transition()) < 1e-10);
    }
  }

  TEST_CASE("radar scenario LP agrees with value iteration") {
    for (double chi : {2.0, 10.0, 50.0}) {
      const MdpModel model = covert::radar::paper_default_scenario(chi).first;
      const OccupationMeasure pi = covert::solve_average_cost_lp(model);
      CHECK(std::abs(covert::average_cost(pi, model) - covert::relative_value_iteration(model)) < 1e-6);
      CHECK(covert::flow_residual(pi, model.transition()) < 1e-12);
    }
  }

  TEST_CASE("policy extraction") {
    VectorXd flat(4);
    flat << 0.2, 0.0, 0.0, 0.8;
    const covert::Policy mu = covert::extract_policy(OccupationMeasure(2, 2, flat));
    CHECK(mu(0, 0) == 1.0);
    CHECK(mu(1, 1) == 1.0);
    const covert::Policy half = covert::extract_policy(OccupationMeasure(2, 2, VectorXd::Constant(4, 0.25)));
    CHECK(half.matrix().isApproxToConstant(0.5));
    flat << 0.5, 0.5, 0.0, 0.0;
    CHECK(code_of([&] { covert::extract_policy(OccupationMeasure(2, 2, flat)); }) == ErrorCode::ZeroStateMass);
  }

  TEST_CASE("occupation from a policy is stationary") {
    covert::Rng rng(12);
    for (int trial = 0; trial < 50; ++trial) {
      const TransitionTensor t = fixture::random_transition(rng, 4, 3);
      const MatrixXd mu = fixture::random_policy(rng, 4, 3);
      const OccupationMeasure pi = covert::occupation_from_policy(t, covert::Policy(mu));
      CHECK((pi.flat() - fixture::occupation_of(t, mu)).lpNorm<Eigen::Infinity>() < 1e-12);
      CHECK(covert::flow_residual(pi, t) < 1e-14);
      CHECK((covert::extract_policy(pi).matrix() - mu).lpNorm<Eigen::Infinity>() < 1e-12);
      const auto set = covert::flow_constraints(t);
      CHECK(set.equality_residual(pi.flat()) < 1e-14);
    }
  }

  TEST_CASE("model invariants") {
    TransitionTensor t = uniform_transition(2, 2);
    MatrixXd cost = MatrixXd::Ones(2, 2);
    CHECK_NOTHROW(MdpModel(t, cost));
    cost(1, 0) = -0.1;
    CHECK(code_of([&] { MdpModel(t, cost); }) == ErrorCode::InvalidModel);
    cost(1, 0) = std::nan("");
    CHECK(code_of([&] { MdpModel(t, cost); }) == ErrorCode::InvalidModel);
    cost.setOnes();
    t(0, 1, 0) = 0.0;
    t(0, 1, 1) = 1.0;
    CHECK(code_of([&] { MdpModel(t, cost); }) == ErrorCode::InvalidModel);
    t(0, 1, 0) = 0.5 + 1e-9;
    t(0, 1, 1) = 0.5;
    CHECK(code_of([&] { MdpModel(t, cost); }) == ErrorCode::InvalidModel);
    CHECK(code_of([&] { MdpModel(uniform_transition(2, 2), MatrixXd::Ones(2, 3)); }) == ErrorCode::InvalidModel);
  }

  TEST_CASE("occupation checks") {
    const TransitionTensor t = uniform_transition(2, 1);
    VectorXd flat(2);
    flat << 0.5, 0.5;
    CHECK_NOTHROW(covert::check_occupation(OccupationMeasure(2, 1, flat), t));
    flat << 0.6, 0.6;
    CHECK(code_of([&] { covert::check_occupation(OccupationMeasure(2, 1, flat), t); }) == ErrorCode::InvalidArgument);
    flat << 0.7, 0.3;
    CHECK(code_of([&] { covert::check_occupation(OccupationMeasure(2, 1, flat), t); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { OccupationMeasure(2, 2, VectorXd::Ones(3)); }) == ErrorCode::DimensionMismatch);
  }
}
