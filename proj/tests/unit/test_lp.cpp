#include "doctest.h"

#include "covert/error.hpp"
#include "covert/optim.hpp"
#include "oracles.hpp"

using covert::Error;
using covert::ErrorCode;
using covert::optim::LinearConstraints;
using covert::optim::LpProblem;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LpProblem make_lp(const MatrixXd& a, const VectorXd& b, const VectorXd& c) {
  return {c, LinearConstraints{a, b, VectorXd::Zero(a.cols())}};
}

ErrorCode code_of(const LpProblem& lp) {
  try {
    covert::optim::lp_solve(lp);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_SUITE("lp") {
  TEST_CASE("two-variable examples") {
    MatrixXd a(1, 2);
    a << 1, 1;
    const VectorXd b = VectorXd::Ones(1);
    const VectorXd x = covert::optim::lp_solve(make_lp(a, b, VectorXd::Ones(2)));
    CHECK(x.sum() == doctest::Approx(1.0).epsilon(1e-12));

    VectorXd c(2);
    c << 1, 0;
    const VectorXd y = covert::optim::lp_solve(make_lp(a, b, c));
    CHECK(y(0) == doctest::Approx(0.0));
    CHECK(y(1) == doctest::Approx(1.0));
  }

  TEST_CASE("recovers planted optima") {
    covert::Rng rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
      const Eigen::Index m = 2 + trial % 5;
      const Eigen::Index n = m + 3 + trial % 7;
      const oracle::PlantedLp lp = oracle::planted_lp(rng, n, m);
      const VectorXd x = covert::optim::lp_solve(make_lp(lp.a, lp.b, lp.c));
      CAPTURE(trial);
      CHECK(std::abs(lp.c.dot(x) - lp.optimum) < 1e-9 * std::max(1.0, std::abs(lp.optimum)));
      CHECK((x - lp.x_star).lpNorm<Eigen::Infinity>() < 1e-8);
      CHECK(x.minCoeff() >= 0.0);
    }
  }

  TEST_CASE("respects non-zero lower bounds") {
    MatrixXd a(1, 3);
    a << 1, 1, 1;
    VectorXd c(3);
    c << 1, 2, 3;
    LpProblem lp{c, LinearConstraints{a, VectorXd::Ones(1), VectorXd::Constant(3, 0.1)}};
    const VectorXd x = covert::optim::lp_solve(lp);
    CHECK(x(0) == doctest::Approx(0.8));
    CHECK(x(1) == doctest::Approx(0.1));
    CHECK(x(2) == doctest::Approx(0.1));
  }

  TEST_CASE("redundant rows are tolerated") {
    MatrixXd a(3, 3);
    a << 1, 1, 0, 0, 1, 1, 1, 2, 1;
    VectorXd b(3);
    b << 1, 1, 2;
    VectorXd c(3);
    c << 1, 3, 1;
    const VectorXd x = covert::optim::lp_solve(make_lp(a, b, c));
    CHECK((a * x - b).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(c.dot(x) == doctest::Approx(2.0));
  }

  TEST_CASE("infeasible and unbounded problems") {
    MatrixXd a(1, 2);
    a << 1, 1;
    CHECK(code_of(make_lp(a, -VectorXd::Ones(1), VectorXd::Ones(2))) == ErrorCode::Infeasible);

    MatrixXd inconsistent(2, 2);
    inconsistent << 1, 1, 2, 2;
    VectorXd rhs(2);
    rhs << 1, 3;
    CHECK(code_of(make_lp(inconsistent, rhs, VectorXd::Ones(2))) == ErrorCode::Infeasible);

    MatrixXd diff(1, 2);
    diff << 1, -1;
    VectorXd c(2);
    c << -1, 0;
    CHECK(code_of(make_lp(diff, VectorXd::Zero(1), c)) == ErrorCode::Unbounded);
  }

  TEST_CASE("dimension checks") {
    LpProblem lp{VectorXd::Ones(3), LinearConstraints{MatrixXd::Ones(1, 2), VectorXd::Ones(1), VectorXd::Zero(2)}};
    CHECK(code_of(lp) == ErrorCode::DimensionMismatch);
  }
}
