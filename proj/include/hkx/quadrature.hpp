#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "hkx/types.hpp"

namespace hkx {

struct QuadratureRule {
  std::vector<Real> nodes;    // on [-1, 1], ascending
  std::vector<Real> weights;
};

/// Gauss-Legendre rule via the Golub-Welsch eigenvalue problem.
inline QuadratureRule gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  RMatrix jacobi = RMatrix::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const Real b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> solver(jacobi);
  QuadratureRule rule;
  for (int i = 0; i < points; ++i) {
    rule.nodes.push_back(solver.eigenvalues()(i));
    const Real v0 = solver.eigenvectors()(0, i);
    rule.weights.push_back(2.0 * v0 * v0);
  }
  return rule;
}

}  // namespace hkx
