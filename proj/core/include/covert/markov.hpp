#pragma once

#include <Eigen/Dense>

namespace covert {

/// True when the directed graph of strictly positive entries of the
/// square matrix `p` is strongly connected.
bool is_irreducible(const Eigen::MatrixXd& p);

/// Stationary row vector of the row-stochastic matrix `p` (a^T p = a^T,
/// sum a = 1). Uses Grassmann-Taksar-Heyman elimination on the balance
/// equations, which never subtracts and therefore keeps full relative
/// accuracy for entries spanning many orders of magnitude.
///
/// Throws Error(NotIrreducible) when `p` is not irreducible.
Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& p);

}  // namespace covert
