#include "covert/fim.hpp"

#include <cmath>
#include <sstream>

#include "covert/error.hpp"
#include "covert/markov.hpp"

namespace covert {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kLogFloor = 1e-300;

double checked_log(double x, const char* what) {
  if (!(x >= kLogFloor)) {
    std::ostringstream msg;
    msg << what << " entry " << x << " is not positive";
    throw Error(ErrorCode::NonPositiveEntry, msg.str());
  }
  return std::log(x);
}

}  // namespace

AugmentedChain::AugmentedChain(MatrixXd a) : AugmentedChain(std::move(a), -1, 1) {}

AugmentedChain::AugmentedChain(MatrixXd a, Index n_states, Index n_actions)
    : a_(std::move(a)), n_states_(n_states < 0 ? a_.rows() : n_states), n_actions_(n_actions) {
  if (a_.rows() != a_.cols() || a_.rows() == 0 || n_states_ * n_actions_ != a_.rows()) {
    throw Error(ErrorCode::InvalidArgument, "augmented chain must be a non-empty square matrix of size |X||U|");
  }
  for (Index m = 0; m < a_.rows(); ++m) {
    if (a_.row(m).minCoeff() < 0.0 || std::abs(a_.row(m).sum() - 1.0) > 1e-12) {
      throw Error(ErrorCode::InvalidArgument, "augmented chain row " + std::to_string(m) + " is not a distribution");
    }
  }
}

AugmentedChain augment(const TransitionTensor& transition, const OccupationMeasure& pi) {
  const Index n = transition.n_states();
  const Index k = transition.n_actions();
  if (pi.n_states() != n || pi.n_actions() != k) {
    throw Error(ErrorCode::DimensionMismatch, "occupation measure and transition tensor disagree in shape");
  }
  const Policy mu = extract_policy(pi);
  MatrixXd a(n * k, n * k);
  for (Index i = 0; i < n; ++i) {
    for (Index u = 0; u < k; ++u) {
      for (Index j = 0; j < n; ++j) {
        for (Index v = 0; v < k; ++v) a(i * k + u, j * k + v) = mu(j, v) * transition(i, u, j);
      }
    }
  }
  // Rows sum to 1 up to rounding of the policy and transition rows.
  for (Index m = 0; m < a.rows(); ++m) a.row(m) /= a.row(m).sum();
  return AugmentedChain(std::move(a), n, k);
}

AugmentedChain augment(const MdpModel& model, const OccupationMeasure& pi) { return augment(model.transition(), pi); }

VectorXd stationary_distribution(const AugmentedChain& chain) { return stationary_vector(chain.matrix()); }

double log_det_fim_paper(const OccupationMeasure& pi, const TransitionTensor& transition) {
  const double nx = static_cast<double>(transition.n_states());
  const double nu = static_cast<double>(transition.n_actions());
  if (pi.n_states() != transition.n_states() || pi.n_actions() != transition.n_actions()) {
    throw Error(ErrorCode::DimensionMismatch, "occupation measure and transition tensor disagree in shape");
  }
  double marginal = 0.0;
  const VectorXd d = pi.state_marginals();
  for (Index j = 0; j < d.size(); ++j) marginal += checked_log(d(j), "state marginal");
  double trans = 0.0;
  const auto flat = transition.flat();
  for (Index e = 0; e < flat.size(); ++e) trans += checked_log(flat(e), "transition");
  return nx * nu * nu * marginal - nu * trans;
}

double log_det_fim_paper(const OccupationMeasure& pi, const MdpModel& model) {
  return log_det_fim_paper(pi, model.transition());
}

Index BlockDiagonalFim::dimension() const {
  Index total = 0;
  for (const auto& b : blocks) total += b.rows();
  return total;
}

MatrixXd BlockDiagonalFim::dense() const {
  MatrixXd f = MatrixXd::Zero(dimension(), dimension());
  Index offset = 0;
  for (const auto& b : blocks) {
    f.block(offset, offset, b.rows(), b.cols()) = b;
    offset += b.rows();
  }
  return f;
}

BlockDiagonalFim assemble_fim(const AugmentedChain& chain) {
  return assemble_fim(chain, stationary_distribution(chain));
}

BlockDiagonalFim assemble_fim(const AugmentedChain& chain, const VectorXd& stationary) {
  const Index s = chain.size();
  if (stationary.size() != s) throw Error(ErrorCode::DimensionMismatch, "stationary vector length differs from chain");
  BlockDiagonalFim fim;
  fim.blocks.reserve(static_cast<std::size_t>(s));
  for (Index m = 0; m < s; ++m) {
    const double am = stationary(m);
    checked_log(am, "stationary");
    for (Index n = 0; n < s; ++n) checked_log(chain(m, n), "chain");
    MatrixXd block = MatrixXd::Constant(s - 1, s - 1, am / chain(m, s - 1));
    for (Index n = 0; n + 1 < s; ++n) block(n, n) += am / chain(m, n);
    fim.blocks.push_back(std::move(block));
  }
  return fim;
}

double log_det_fim_oracle(const AugmentedChain& chain) { return log_det_fim_oracle(chain, stationary_distribution(chain)); }

double log_det_fim_oracle(const AugmentedChain& chain, const VectorXd& stationary) {
  const Index s = chain.size();
  if (stationary.size() != s) throw Error(ErrorCode::DimensionMismatch, "stationary vector length differs from chain");
  if (s == 1) return 0.0;
  // Each block is a_m (D + 1 1^T / a_mS); by the determinant lemma its
  // determinant is a_m^{S-1} / prod_n a_mn. Evaluated in log form because
  // the blocks are far too ill-conditioned to factor when entries are tiny.
  double total = 0.0;
  for (Index m = 0; m < s; ++m) {
    total += static_cast<double>(s - 1) * checked_log(stationary(m), "stationary");
    for (Index n = 0; n < s; ++n) total -= checked_log(chain(m, n), "chain");
  }
  return total;
}

MatrixXd fim_finite_difference_oracle(const AugmentedChain& chain, double h) {
  if (!(h >= 1e-6 && h <= 1e-3)) {
    throw Error(ErrorCode::StepTooLarge, "finite-difference step must lie in [1e-6, 1e-3]");
  }
  if (chain.matrix().minCoeff() < 10.0 * h) {
    throw Error(ErrorCode::StepTooLarge, "a chain entry is smaller than 10 h");
  }
  const Index s = chain.size();
  const Index p = s - 1;
  const VectorXd a = stationary_distribution(chain);
  MatrixXd f = MatrixXd::Zero(s * p, s * p);

  // The likelihood is a sum of per-row terms, so parameters of different
  // rows never interact and each block is differenced on its own row.
  // Increments are taken term by term with log1p so the row's base value
  // never enters a cancellation.
  VectorXd step(p);
  for (Index m = 0; m < s; ++m) {
    const VectorXd truth = chain.matrix().row(m).transpose();
    auto increment = [&](const VectorXd& dv) {
      double value = 0.0;
      for (Index n = 0; n < p; ++n) {
        if (dv(n) != 0.0) value += truth(n) * std::log1p(dv(n) / truth(n));
      }
      value += truth(p) * std::log1p(-dv.sum() / truth(p));
      return a(m) * value;
    };
    for (Index x = 0; x < p; ++x) {
      step.setZero();
      step(x) = h;
      const double fp = increment(step);
      step(x) = -h;
      const double fm = increment(step);
      f(m * p + x, m * p + x) = -(fp + fm) / (h * h);
      for (Index y = x + 1; y < p; ++y) {
        double acc = 0.0;
        for (int sx : {1, -1}) {
          for (int sy : {1, -1}) {
            step.setZero();
            step(x) = sx * h;
            step(y) = sy * h;
            acc += sx * sy * increment(step);
          }
        }
        const double entry = -acc / (4.0 * h * h);
        f(m * p + x, m * p + y) = entry;
        f(m * p + y, m * p + x) = entry;
      }
    }
  }
  return f;
}

FisherReport fisher_report(const TransitionTensor& transition, const OccupationMeasure& pi) {
  FisherReport r;
  const double nx = static_cast<double>(transition.n_states());
  const double nu = static_cast<double>(transition.n_actions());
  const VectorXd d = pi.state_marginals();
  for (Index j = 0; j < d.size(); ++j) r.marginal_term += checked_log(d(j), "state marginal");
  r.marginal_term *= nx * nu * nu;
  const auto flat = transition.flat();
  for (Index e = 0; e < flat.size(); ++e) r.transition_term += checked_log(flat(e), "transition");
  r.transition_term *= nu;
  r.log_det_paper = r.marginal_term - r.transition_term;

  const AugmentedChain chain = augment(transition, pi);
  r.stationary = stationary_distribution(chain);
  r.log_det_oracle = log_det_fim_oracle(chain, r.stationary);
  return r;
}

FisherReport fisher_report(const MdpModel& model, const OccupationMeasure& pi) {
  return fisher_report(model.transition(), pi);
}

}  // namespace covert
