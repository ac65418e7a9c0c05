#pragma once

#include <Eigen/Dense>

#include <functional>

namespace tsdae {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Time-varying matrix coefficient t -> M(t).
using MatrixFn = std::function<Matrix(double)>;
/// Time-varying vector t -> v(t).
using VectorFn = std::function<Vector(double)>;

/// Frobenius norm of (lhs - rhs) scaled by (1 + ||rhs||).
inline double relative_residual(const Matrix& lhs, const Matrix& rhs) {
  return (lhs - rhs).norm() / (1.0 + rhs.norm());
}

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace tsdae
