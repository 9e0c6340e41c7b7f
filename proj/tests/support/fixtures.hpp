#pragma once

// Random models and plans shared by the test suites. Generators use only
// the oracles and the public model types, never the solvers under test.

#include <vector>

#include "covert/mdp.hpp"
#include "covert/rng.hpp"
#include "oracles.hpp"

namespace fixture {

inline covert::TransitionTensor random_transition(covert::Rng& rng, covert::Index n, covert::Index m,
                                                  double floor = 0.02) {
  covert::TransitionTensor t(n, m);
  const Eigen::MatrixXd rows = oracle::random_stochastic(rng, n * m, n, floor);
  for (covert::Index i = 0; i < n; ++i) {
    for (covert::Index u = 0; u < m; ++u) t.row(i, u) = rows.row(i * m + u).transpose();
  }
  return t;
}

inline covert::MdpModel random_model(covert::Rng& rng, covert::Index n, covert::Index m) {
  Eigen::MatrixXd cost(n, m);
  for (covert::Index i = 0; i < n; ++i) {
    for (covert::Index u = 0; u < m; ++u) cost(i, u) = rng.uniform();
  }
  return {random_transition(rng, n, m), cost};
}

/// Strictly positive policy with rows bounded away from zero.
inline Eigen::MatrixXd random_policy(covert::Rng& rng, covert::Index n, covert::Index m) {
  return oracle::random_stochastic(rng, n, m, 0.05);
}

/// Occupation measure of `mu` under `t`, via the cofactor oracle.
inline Eigen::VectorXd occupation_of(const covert::TransitionTensor& t, const Eigen::MatrixXd& mu) {
  const covert::Index n = t.n_states();
  const covert::Index m = t.n_actions();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (covert::Index i = 0; i < n; ++i) {
    for (covert::Index u = 0; u < m; ++u) p.row(i) += mu(i, u) * t.row(i, u).transpose();
  }
  const Eigen::VectorXd d = oracle::cofactor_stationary(p);
  Eigen::VectorXd pi(n * m);
  for (covert::Index i = 0; i < n; ++i) {
    for (covert::Index u = 0; u < m; ++u) pi(i * m + u) = d(i) * mu(i, u);
  }
  return pi;
}

inline std::vector<Eigen::VectorXd> rows_of(const covert::TransitionTensor& t) {
  std::vector<Eigen::VectorXd> rows;
  for (covert::Index i = 0; i < t.n_states(); ++i) {
    for (covert::Index u = 0; u < t.n_actions(); ++u) rows.emplace_back(t.row(i, u));
  }
  return rows;
}

}  // namespace fixture
