#pragma once

#include <Eigen/Dense>

namespace dstorm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Row i of a stack holds node i's local copy x_i.
using Stack = Eigen::MatrixXd;

// Row-mean of the stack as a d-vector.
inline Vector row_mean(const Stack& x) { return x.colwise().mean().transpose(); }

// Stack whose every row equals the row-mean of x.
inline Stack mean_stack(const Stack& x) {
  return Stack::Ones(x.rows(), 1) * x.colwise().mean();
}

// Squared Frobenius distance from x to the consensus subspace.
inline double consensus_distance_sq(const Stack& x) {
  return (x.rowwise() - x.colwise().mean()).squaredNorm();
}

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace dstorm
