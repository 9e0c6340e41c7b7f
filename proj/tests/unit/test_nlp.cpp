#include <cmath>

#include "doctest.h"

#include "covert/error.hpp"
#include "covert/optim.hpp"
#include "oracles.hpp"

using covert::Error;
using covert::ErrorCode;
using covert::optim::LinearConstraints;
using covert::optim::NlpProblem;
using covert::optim::SolveStatus;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LinearConstraints simplex(Index n) { return {MatrixXd::Ones(1, n), VectorXd::Ones(1), VectorXd::Zero(n)}; }

NlpProblem quadratic(const VectorXd& target) {
  const Index n = target.size();
  NlpProblem p;
  p.objective = [target](const VectorXd& x, VectorXd& g) {
    g = 2.0 * (x - target);
    return (x - target).squaredNorm();
  };
  p.feasible_set = simplex(n);
  p.x0 = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  p.tol = 1e-10;
  return p;
}

bool non_increasing(const std::vector<double>& v, double slack) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (v[k] > v[k - 1] + slack) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("nlp") {
  TEST_CASE("interior quadratic minimiser") {
    covert::Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
      const Index n = 2 + trial % 9;
      VectorXd target(n);
      for (Index i = 0; i < n; ++i) target(i) = 0.1 + rng.uniform();
      target /= target.sum();
      const auto result = covert::optim::nlp_minimize(quadratic(target));
      CHECK(result.trace.status == SolveStatus::Converged);
      CHECK((result.x - target).lpNorm<Eigen::Infinity>() < 1e-6);
    }
  }

  TEST_CASE("exterior quadratic lands on the simplex projection") {
    covert::Rng rng(2);
    for (int trial = 0; trial < 50; ++trial) {
      const Index n = 2 + trial % 9;
      VectorXd target(n);
      for (Index i = 0; i < n; ++i) target(i) = 3.0 * (rng.uniform() - 0.3);
      const auto result = covert::optim::nlp_minimize(quadratic(target));
      CAPTURE(trial);
      CHECK(result.trace.status == SolveStatus::Converged);
      CHECK((result.x - oracle::simplex_projection(target)).lpNorm<Eigen::Infinity>() < 1e-6);
      CHECK(result.x.minCoeff() >= 0.0);
      CHECK(std::abs(result.x.sum() - 1.0) <= 1e-9);
    }
  }

  TEST_CASE("log barrier on the simplex gives the uniform point") {
    for (Index n : {2, 5, 17}) {
      NlpProblem p;
      p.objective = [](const VectorXd& x, VectorXd& g) {
        g = -x.cwiseInverse();
        return -x.array().log().sum();
      };
      p.feasible_set = simplex(n);
      p.feasible_set.lower_bounds.setConstant(1e-9);
      p.x0 = VectorXd::LinSpaced(n, 1.0, 2.0);
      p.x0 /= p.x0.sum();
      const auto result = covert::optim::nlp_minimize(p);
      CHECK(result.trace.status == SolveStatus::Converged);
      CHECK((result.x.array() - 1.0 / static_cast<double>(n)).abs().maxCoeff() < 1e-6);
    }
  }

  TEST_CASE("objective trace is non-increasing on a nonconvex objective") {
    covert::Rng rng(3);
    for (int trial = 0; trial < 30; ++trial) {
      const Index n = 6;
      VectorXd q(n);
      for (Index i = 0; i < n; ++i) q(i) = rng.uniform();
      NlpProblem p;
      // Squared linear term plus a concave log of pair sums.
      p.objective = [q](const VectorXd& x, VectorXd& g) {
        const double r = q.dot(x) - 0.3;
        double f = r * r;
        g = 2.0 * r * q;
        for (Index k = 0; k < 3; ++k) {
          const double s = x(2 * k) + x(2 * k + 1);
          f += 0.05 * std::log(s);
          g(2 * k) += 0.05 / s;
          g(2 * k + 1) += 0.05 / s;
        }
        return f;
      };
      p.feasible_set = simplex(n);
      p.feasible_set.lower_bounds.setConstant(1e-6);
      p.x0 = VectorXd::Constant(n, 1.0 / n);
      const auto result = covert::optim::nlp_minimize(p);
      CHECK(non_increasing(result.trace.iterates_objective, 1e-12));
      CHECK(result.trace.final_kkt_residual <= 1e-8);
    }
  }

  TEST_CASE("scaled steps reach the same optimum") {
    covert::Rng rng(4);
    const Index n = 8;
    VectorXd target(n);
    for (Index i = 0; i < n; ++i) target(i) = rng.uniform() - 0.2;
    NlpProblem p = quadratic(target);
    p.scaling = [n](const VectorXd&) { return VectorXd::LinSpaced(n, 0.1, 3.0).eval(); };
    const auto result = covert::optim::nlp_minimize(p);
    CHECK(result.trace.status == SolveStatus::Converged);
    CHECK((result.x - oracle::simplex_projection(target)).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK(non_increasing(result.trace.iterates_objective, 1e-12));
  }

  TEST_CASE("iteration cap is reported") {
    VectorXd target = VectorXd::LinSpaced(10, -1.0, 2.0);
    NlpProblem p = quadratic(target);
    p.max_iters = 1;
    const auto result = covert::optim::nlp_minimize(p);
    CHECK(result.trace.status == SolveStatus::IterationCap);
    CHECK(result.trace.iterations == 1);
  }

  TEST_CASE("infeasible starts are rejected") {
    NlpProblem p = quadratic(VectorXd::Constant(3, 1.0 / 3.0));
    p.x0 << 0.5, 0.5, 0.5;
    try {
      covert::optim::nlp_minimize(p);
      FAIL("expected InfeasibleStart");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InfeasibleStart);
    }
    p.x0 << 1.5, -0.5, 0.0;
    CHECK_THROWS_AS(covert::optim::nlp_minimize(p), Error);
  }
}
