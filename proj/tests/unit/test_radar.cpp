#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "covert/error.hpp"
#include "covert/radar.hpp"

using covert::Error;
using covert::ErrorCode;
using covert::radar::ScenarioParams;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ScenarioParams small_params(double lo, double hi, Index n, double k, double t) {
  ScenarioParams p;
  p.sinr_min_db = lo;
  p.sinr_max_db = hi;
  p.n_states = n;
  p.chi = 10.0;
  p.c_u = {0.5};
  p.t_u = {t};
  p.k_i.assign(static_cast<std::size_t>(n), k);
  return p;
}

bool rejects(const ScenarioParams& p) {
  try {
    p.validate();
  } catch (const Error& e) {
    return e.code() == ErrorCode::InvalidArgument;
  }
  return false;
}

}  // namespace

TEST_SUITE("radar") {
  TEST_CASE("published parameter values") {
    const ScenarioParams p = covert::radar::paper_default_params();
    REQUIRE(p.n_actions() == 4);
    REQUIRE(p.n_states == 10);
    CHECK(p.c_u[2] == 0.977);
    CHECK(p.c_u[0] == 0.606);
    CHECK(p.c_u[1] == 0.407);
    CHECK(p.c_u[3] == 0.465);
    CHECK(p.k_i.front() == 0.0040);
    CHECK(p.k_i.back() == 0.8500);
    CHECK(p.t_u[0] == 0.083);
    CHECK(p.t_u[3] == 0.928);
    CHECK(std::is_sorted(p.k_i.begin(), p.k_i.end()));
    CHECK(p.action_names[3] == "Coarse Tracking");
    CHECK(p.sinr_min_db == 0.0);
    CHECK(p.sinr_max_db == 35.0);
    CHECK(p.chi == 10.0);
    CHECK(covert::radar::paper_default_params(2.0).chi == 2.0);
  }

  TEST_CASE("cost model") {
    const ScenarioParams p = covert::radar::paper_default_params(10.0);
    const VectorXd rho = covert::radar::sinr_midpoints(p);
    CHECK(rho(0) == doctest::Approx(1.75));
    CHECK(rho(9) == doctest::Approx(33.25));
    const MatrixXd c = covert::radar::build_cost(p);
    for (Index u = 0; u < 4; ++u) {
      CHECK(c(9, u) == doctest::Approx((1.0 - std::tanh(3.325)) * p.c_u[static_cast<std::size_t>(u)]).epsilon(1e-14));
      for (Index i = 1; i < 10; ++i) CHECK(c(i, u) < c(i - 1, u));
    }
    // A bin centred on 0 dB carries the bare action cost.
    const MatrixXd centred = covert::radar::build_cost(small_params(-1.5, 1.5, 3, 0.1, 1.0));
    CHECK(centred(1, 0) == 0.5);
  }

  TEST_CASE("softmax transition examples") {
    const auto two = covert::radar::build_transition(small_params(-5.0, 15.0, 2, 0.1, 1.0));
    const double e = std::exp(-1.0);
    CHECK(two(0, 0, 0) == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-14));
    CHECK(two(0, 0, 1) == doctest::Approx(e / (1.0 + e)).epsilon(1e-14));
    CHECK(two(0, 0, 0) == doctest::Approx(0.7311).epsilon(1e-4));

    const auto flat = covert::radar::build_transition(small_params(0.0, 35.0, 7, 0.0, 1.0));
    CHECK(flat.flat().isApproxToConstant(1.0 / 7.0, 1e-15));
  }

  TEST_CASE("default scenario invariants") {
    for (double chi : {2.0, 10.0, 50.0}) {
      const auto [model, p] = covert::radar::paper_default_scenario(chi);
      const auto& t = model.transition();
      CHECK(model.n_states() == 10);
      CHECK(model.n_actions() == 4);
      CHECK(t.flat().minCoeff() > 0.0);
      for (Index i = 0; i < 10; ++i) {
        for (Index u = 0; u < 4; ++u) {
          CHECK(std::abs(t.row(i, u).sum() - 1.0) < 1e-12);
          // Lower SINR targets are at least as likely, exactly.
          for (Index j = 1; j < 10; ++j) CHECK(t(i, u, j - 1) >= t(i, u, j));
          if (i >= 10 - 1 - i) {
            double below = 0.0;
            double above = 0.0;
            for (Index j = 0; j < 10; ++j) (j < i ? below : above) += j == i ? 0.0 : t(i, u, j);
            CHECK(below > above);
          }
        }
      }
    }
  }

  TEST_CASE("parameter validation") {
    ScenarioParams ok = small_params(0.0, 10.0, 3, 0.1, 1.0);
    CHECK_NOTHROW(ok.validate());
    ScenarioParams p = ok;
    p.sinr_max_db = 0.0;
    CHECK(rejects(p));
    p = ok;
    p.n_states = 1;
    p.k_i = {0.1};
    CHECK(rejects(p));
    p = ok;
    p.chi = 0.0;
    CHECK(rejects(p));
    p = ok;
    p.c_u = {0.0};
    CHECK(rejects(p));
    p = ok;
    p.t_u = {-1.0};
    CHECK(rejects(p));
    p = ok;
    p.k_i = {0.2, 0.1, 0.3};
    CHECK(rejects(p));
    p = ok;
    p.k_i = {0.1, 0.2};
    CHECK(rejects(p));
  }
}
