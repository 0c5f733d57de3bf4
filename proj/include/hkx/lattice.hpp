#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "hkx/types.hpp"

namespace hkx {

/// Periodic one-dimensional lattice with spacing dx and mass m (natural units).
struct LatticeSpec {
  int sites = 1;
  Real spacing = 1.0;
  Real mass = 1.0;

  void validate() const {
    if (sites < 1) throw std::invalid_argument("lattice.sites must be >= 1");
    if (!(spacing > 0.0)) throw std::invalid_argument("lattice.spacing must be > 0");
    if (!(mass > 0.0)) throw std::invalid_argument("lattice.mass must be strictly positive");
  }

  bool operator==(const LatticeSpec&) const = default;
};

/// Periodic discrete -d^2/dx^2 + m^2.
inline RMatrix shifted_laplacian(const LatticeSpec& spec) {
  spec.validate();
  const int n = spec.sites;
  const Real inv_dx2 = 1.0 / (spec.spacing * spec.spacing);
  RMatrix k = RMatrix::Zero(n, n);
  for (int x = 0; x < n; ++x) {
    k(x, x) += spec.mass * spec.mass;
    if (n == 1) continue;
    // (-Δf)(x) = (2f(x) - f(x+1) - f(x-1)) / dx^2; for n == 2 both neighbours coincide.
    k(x, x) += 2.0 * inv_dx2;
    k(x, (x + 1) % n) -= inv_dx2;
    k(x, (x + n - 1) % n) -= inv_dx2;
  }
  return k;
}

/// Spectral data of the one-particle operator ω = (-Δ + m²)^{1/2}.
///
/// The eigendecomposition is computed once; every function of ω used elsewhere
/// (square root, heat flow e^{-sω}, the (2ω)^{-1/2} smearing) goes through it.
/// Immutable after construction.
class Lattice {
 public:
  explicit Lattice(LatticeSpec spec) : spec_(spec) {
    spec_.validate();
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(shifted_laplacian(spec_));
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("eigendecomposition of the lattice Laplacian failed");
    frequencies_ = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    vectors_ = solver.eigenvectors();
    // Fix the sign of each eigenvector so runs are reproducible.
    for (int k = 0; k < vectors_.cols(); ++k) {
      Eigen::Index pivot = 0;
      vectors_.col(k).cwiseAbs().maxCoeff(&pivot);
      if (vectors_(pivot, k) < 0.0) vectors_.col(k) *= -1.0;
    }
  }

  const LatticeSpec& spec() const { return spec_; }
  int sites() const { return spec_.sites; }
  Real spacing() const { return spec_.spacing; }

  /// Eigenvalues ω_k in ascending order.
  const RVector& frequencies() const { return frequencies_; }

  /// Euclidean-orthonormal eigenvectors (columns).
  const RMatrix& eigenvectors() const { return vectors_; }

  /// Mode function u_k, orthonormal under dx·Σ ū v.
  RVector mode(int k) const {
    if (k < 0 || k >= sites()) throw std::out_of_range("mode index out of range");
    return vectors_.col(k) / std::sqrt(spec_.spacing);
  }

  /// Real symmetric matrix fn(ω).
  RMatrix matrix_function(const std::function<Real(Real)>& fn) const {
    RVector d = frequencies_.unaryExpr(fn);
    return vectors_ * d.asDiagonal() * vectors_.transpose();
  }

  RMatrix omega() const {
    return matrix_function([](Real w) { return w; });
  }

  /// fn(ω) applied to a lattice function.
  LatticeFunction apply(const std::function<Real(Real)>& fn, const LatticeFunction& v) const {
    check_length(v);
    RVector d = frequencies_.unaryExpr(fn);
    CVector coeff = vectors_.transpose().cast<Complex>() * v;
    return vectors_.cast<Complex>() * (d.cast<Complex>().asDiagonal() * coeff);
  }

  /// e^{-sω} v.
  LatticeFunction heat_flow(const LatticeFunction& v, Real s) const {
    return apply([s](Real w) { return std::exp(-s * w); }, v);
  }

  void check_length(const LatticeFunction& v) const {
    if (v.size() != sites())
      throw std::invalid_argument("lattice function has length " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(sites()));
  }

 private:
  LatticeSpec spec_;
  RVector frequencies_;
  RMatrix vectors_;
};

using LatticePtr = std::shared_ptr<const Lattice>;

inline LatticePtr make_lattice(LatticeSpec spec) { return std::make_shared<const Lattice>(spec); }

inline RMatrix omega_matrix(const LatticeSpec& spec) { return Lattice(spec).omega(); }

/// Bilinear lattice pairing dx·Σ h(x) f(x). No complex conjugation.
inline Complex pair(const LatticeSpec& spec, const LatticeFunction& h, const LatticeFunction& f) {
  if (h.size() != f.size() || h.size() != spec.sites)
    throw std::invalid_argument("pair: lattice function lengths do not match");
  return spec.spacing * (h.array() * f.array()).sum();
}

/// Lattice delta: 1/dx at site x so that pair(dirac(x), f) == f(x).
inline LatticeFunction dirac(const LatticeSpec& spec, int x) {
  if (x < 0 || x >= spec.sites) throw std::out_of_range("dirac: site index out of range");
  LatticeFunction d = LatticeFunction::Zero(spec.sites);
  d(x) = 1.0 / spec.spacing;
  return d;
}

inline LatticeFunction constant_function(const LatticeSpec& spec, Complex value) {
  return LatticeFunction::Constant(spec.sites, value);
}

enum class Direction { Forward, Backward };

/// Smoothed heat-flow profile: v_s = (2ω)^{-1/2} e^{-sω} v (Forward) or v_{β-s} (Backward).
struct ProfileTerm {
  LatticeFunction base;
  Direction direction = Direction::Forward;
  Real beta = 0.0;
};

inline LatticeFunction profile_at(const ProfileTerm& term, Real s, const Lattice& lattice) {
  lattice.check_length(term.base);
  Real t = s;
  if (term.direction == Direction::Backward) {
    if (!(term.beta > 0.0)) throw std::invalid_argument("backward profile requires beta > 0");
    if (s < 0.0 || s > term.beta)
      throw std::out_of_range("profile evaluation time outside [0, beta]");
    t = term.beta - s;
  }
  return lattice.apply([t](Real w) { return std::exp(-t * w) / std::sqrt(2.0 * w); }, term.base);
}

}  // namespace hkx
