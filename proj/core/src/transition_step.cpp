#include <algorithm>
#include <cmath>
#include <limits>

#include "covert/error.hpp"
#include "covert/masking.hpp"

namespace covert::masking {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Minimiser over p > 0 of gamma1 |p - p0| - gamma2 log p - w p, and its
// derivative in w (zero on the flat piece p = p0).
struct EntryResponse {
  double p;
  double slope;
};

class EntrySolver {
 public:
  EntrySolver(double gamma1, double gamma2) : g1_(gamma1), g2_(gamma2) {}

  EntryResponse operator()(double w, double p0) const {
    if (w > g1_ - g2_ / p0) {
      const double p = g2_ / (g1_ - w);
      return {p, p * p / g2_};
    }
    if (w < -g1_ - g2_ / p0) {
      const double p = -g2_ / (g1_ + w);
      return {p, p * p / g2_};
    }
    return {p0, 0.0};
  }

  double penalty(double p, double p0) const { return g1_ * std::abs(p - p0) - g2_ * std::log(p); }

  double gamma1() const { return g1_; }

 private:
  double g1_;
  double g2_;
};

// Row multiplier nu with sum_j p(nu + s_j) = 1, where s_j = pi_r lambda_j.
double solve_row(const EntrySolver& entry, const VectorXd& shift, const double* p0, Index n, double warm) {
  const double nu_max = entry.gamma1() - shift.maxCoeff();
  auto excess = [&](double nu, double* slope) {
    double total = 0.0;
    double d = 0.0;
    for (Index j = 0; j < n; ++j) {
      const EntryResponse e = entry(nu + shift(j), p0[j]);
      total += e.p;
      d += e.slope;
    }
    if (slope) *slope = d;
    return total - 1.0;
  };

  double hi = nu_max;
  double step = 1.0;
  double lo = nu_max - step;
  while (excess(lo, nullptr) > 0.0) {
    step *= 2.0;
    lo = nu_max - step;
    if (step > 1e300) throw Error(ErrorCode::NoConvergence, "transition step: row multiplier bracket diverged");
  }

  double nu = (warm > lo && warm < hi) ? warm : lo;
  for (int it = 0; it < 300; ++it) {
    double slope = 0.0;
    const double r = excess(nu, &slope);
    if (std::abs(r) <= 4.0 * std::numeric_limits<double>::epsilon()) return nu;
    if (r > 0.0) {
      hi = nu;
    } else {
      lo = nu;
    }
    double next = slope > 0.0 ? nu - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == nu || hi - lo <= 1e-16 * std::max(1.0, std::abs(nu))) return next;
    nu = next;
  }
  return nu;
}

struct DualState {
  VectorXd nu;
  MatrixXd p;         // rows x n_states
  MatrixXd slope;     // rows x n_states
  double value = 0.0;
  VectorXd gradient;  // length n_states
};

}  // namespace

TransitionStepResult transition_step(const TransitionTensor& p0, const TransitionTensor& previous, const VectorXd& pi,
                                     double gamma1, double gamma2) {
  const Index n = p0.n_states();
  const Index m = p0.n_actions();
  const Index rows = n * m;
  if (pi.size() != rows || previous.n_states() != n || previous.n_actions() != m) {
    throw Error(ErrorCode::DimensionMismatch, "transition step: shapes disagree");
  }
  if (!(gamma1 >= 0.0) || !(gamma2 >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "transition step: multipliers must be non-negative");
  }

  VectorXd marginals = VectorXd::Zero(n);
  for (Index r = 0; r < rows; ++r) marginals(r / m) += pi(r);

  auto residual_of = [&](const TransitionTensor& t) {
    VectorXd inflow = VectorXd::Zero(n);
    for (Index r = 0; r < rows; ++r) inflow += pi(r) * t.row(r / m, r % m);
    return (marginals - inflow).lpNorm<Eigen::Infinity>();
  };

  if (gamma2 == 0.0 && previous == p0) {
    return {previous, residual_of(previous), 0, true};
  }
  // The log barrier keeps every entry positive; without it the problem
  // would be a linear program whose vertices sit on the boundary.
  const double g2 = gamma2 > 0.0 ? gamma2 : 1e-12 * std::max(1.0, gamma1);
  const EntrySolver entry(gamma1, g2);

  const auto p0_flat = p0.flat();
  DualState state;
  state.nu = VectorXd::Zero(rows);
  state.p.resize(rows, n);
  state.slope.resize(rows, n);
  VectorXd shift(n);

  auto evaluate = [&](const VectorXd& lambda, DualState& s) {
    s.value = lambda.dot(marginals);
    s.gradient = marginals;
    for (Index r = 0; r < rows; ++r) {
      shift = pi(r) * lambda;
      const double* row_p0 = p0_flat.data() + r * n;
      s.nu(r) = solve_row(entry, shift, row_p0, n, s.nu(r));
      double row_value = s.nu(r);
      for (Index j = 0; j < n; ++j) {
        const double w = s.nu(r) + shift(j);
        const EntryResponse e = entry(w, row_p0[j]);
        s.p(r, j) = e.p;
        s.slope(r, j) = e.slope;
        row_value += entry.penalty(e.p, row_p0[j]) - w * e.p;
      }
      s.value += row_value;
      s.gradient -= pi(r) * s.p.row(r).transpose();
    }
  };

  // lambda(n-1) stays 0: the last flow equation is implied by the others.
  const Index k = n - 1;
  VectorXd lambda = VectorXd::Zero(n);
  evaluate(lambda, state);
  const double target = 1e-13 * std::max(1.0, marginals.lpNorm<Eigen::Infinity>());
  int it = 0;
  bool converged = false;
  DualState trial_state = state;
  for (; it < 200; ++it) {
    const VectorXd g = state.gradient.head(k);
    if (g.lpNorm<Eigen::Infinity>() <= target) {
      converged = true;
      break;
    }
    MatrixXd h = MatrixXd::Zero(k, k);
    for (Index r = 0; r < rows; ++r) {
      const VectorXd d = state.slope.row(r).head(k).transpose();
      const double total = state.slope.row(r).sum();
      if (total <= 0.0) continue;
      const double w2 = pi(r) * pi(r);
      h.diagonal() += w2 * d;
      h.noalias() -= (w2 / total) * d * d.transpose();
    }
    const double scale = std::max(h.diagonal().maxCoeff(), 1.0);
    h.diagonal().array() += 1e-10 * scale;
    const VectorXd step = h.ldlt().solve(g);
    const double slope = g.dot(step);

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      VectorXd candidate = lambda;
      candidate.head(k) += t * step;
      trial_state.nu = state.nu;
      evaluate(candidate, trial_state);
      if (trial_state.value >= state.value + 1e-4 * t * slope) {
        lambda = candidate;
        std::swap(state, trial_state);
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }

  TransitionStepResult result{TransitionTensor(n, m), 0.0, it, converged};
  for (Index r = 0; r < rows; ++r) {
    const double sum = state.p.row(r).sum();
    for (Index j = 0; j < n; ++j) {
      const double p = state.p(r, j) / sum;
      if (!(p > 0.0)) throw Error(ErrorCode::NonPositiveEntry, "transition step produced a non-positive entry");
      result.transition(r / m, r % m, j) = p;
    }
  }
  result.flow_residual = residual_of(result.transition);
  return result;
}

}  // namespace covert::masking
