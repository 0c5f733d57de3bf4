#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace hkx {

using Real = double;
using Complex = std::complex<double>;

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One complex value per lattice site.
using LatticeFunction = CVector;

}  // namespace hkx
