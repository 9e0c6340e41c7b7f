#include "covert/markov.hpp"

#include <vector>

#include "covert/error.hpp"

namespace covert {

namespace {

std::vector<bool> reachable(const Eigen::MatrixXd& p, bool transpose) {
  const Eigen::Index n = p.rows();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack{0};
  seen[0] = true;
  while (!stack.empty()) {
    const Eigen::Index v = stack.back();
    stack.pop_back();
    for (Eigen::Index w = 0; w < n; ++w) {
      const double entry = transpose ? p(w, v) : p(v, w);
      if (entry > 0.0 && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        stack.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& p) {
  if (p.rows() != p.cols() || p.rows() == 0) return false;
  for (bool transpose : {false, true}) {
    for (bool v : reachable(p, transpose)) {
      if (!v) return false;
    }
  }
  return true;
}

Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& p) {
  if (p.rows() != p.cols() || p.rows() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "stationary_vector needs a non-empty square matrix");
  }
  if (!is_irreducible(p)) {
    throw Error(ErrorCode::NotIrreducible, "chain has more than one communicating class");
  }
  const Eigen::Index n = p.rows();
  Eigen::MatrixXd a = p;
  for (Eigen::Index k = n - 1; k > 0; --k) {
    const double s = a.row(k).head(k).sum();
    if (!(s > 0.0)) {
      throw Error(ErrorCode::NotIrreducible, "state reduction met an absorbing block");
    }
    a.col(k).head(k) /= s;
    a.topLeftCorner(k, k).noalias() += a.col(k).head(k) * a.row(k).head(k);
  }
  Eigen::VectorXd x(n);
  x(0) = 1.0;
  for (Eigen::Index k = 1; k < n; ++k) {
    x(k) = x.head(k).dot(a.col(k).head(k));
  }
  return x / x.sum();
}

}  // namespace covert
