#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "hkx/lattice.hpp"

namespace hkx {

/// Dense complex matrix on the truncated Fock basis.
using FockOperator = CMatrix;

using Occupation = std::vector<int>;

struct FockOptions {
  /// Exponent p in the field smearing d_x = (2ω)^p δ_x. The free-field convention is -1/2;
  /// other values exist only to demonstrate that the identities detect a wrong convention.
  Real field_smearing = -0.5;
};

/// Bosonic Fock space over the eigenmodes of ω, truncated at total particle number n_max.
///
/// Basis states are ordered by total particle number, then lexicographically in the
/// occupation tuple (n_1, ..., n_L). Mode k is the k-th eigenvector of ω in ascending
/// frequency order.
class FockSpace {
 public:
  FockSpace(LatticePtr lattice, int n_max, FockOptions options = {})
      : lattice_(std::move(lattice)), n_max_(n_max), options_(options) {
    if (!lattice_) throw std::invalid_argument("FockSpace: null lattice");
    if (n_max_ < 1) throw std::invalid_argument("fock.n_max must be >= 1");
    enumerate();
    build_lowering();
  }

  const Lattice& lattice() const { return *lattice_; }
  const LatticePtr& lattice_ptr() const { return lattice_; }
  const LatticeSpec& spec() const { return lattice_->spec(); }
  const FockOptions& options() const { return options_; }
  int modes() const { return lattice_->sites(); }
  int n_max() const { return n_max_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }

  const Occupation& occupation(Eigen::Index i) const { return basis_.at(static_cast<std::size_t>(i)); }
  int level(Eigen::Index i) const { return levels_.at(static_cast<std::size_t>(i)); }

  Eigen::Index index_of(const Occupation& occ) const {
    auto it = index_.find(occ);
    if (it == index_.end()) throw std::out_of_range("occupation not in truncated basis");
    return it->second;
  }

  /// Basis indices with total particle number <= cap, in basis order.
  std::vector<Eigen::Index> indices_upto(int cap) const {
    std::vector<Eigen::Index> out;
    for (Eigen::Index i = 0; i < dim(); ++i)
      if (levels_[static_cast<std::size_t>(i)] <= cap) out.push_back(i);
    return out;
  }

  /// Single-mode lowering matrix: |.., n_k - 1, ..> sqrt(n_k) <.., n_k, ..|.
  const RMatrix& lowering(int k) const { return lowering_.at(static_cast<std::size_t>(k)); }

  /// Expansion coefficients f_k = dx·Σ u_k(x) f(x) in the real mode basis.
  CVector mode_coefficients(const LatticeFunction& f) const {
    lattice_->check_length(f);
    const Real dx = lattice_->spacing();
    return std::sqrt(dx) * (lattice_->eigenvectors().transpose().cast<Complex>() * f);
  }

  CVector vacuum() const {
    CVector v = CVector::Zero(dim());
    v(0) = 1.0;
    return v;
  }

  CVector basis_vector(Eigen::Index i) const {
    CVector v = CVector::Zero(dim());
    v(i) = 1.0;
    return v;
  }

 private:
  void enumerate() {
    const int modes = lattice_->sites();
    Occupation occ(static_cast<std::size_t>(modes), 0);
    for (int total = 0; total <= n_max_; ++total) {
      // Lexicographic enumeration of compositions of `total` into `modes` parts.
      std::vector<Occupation> layer;
      compositions(total, 0, occ, layer);
      for (auto& o : layer) {
        index_.emplace(o, static_cast<Eigen::Index>(basis_.size()));
        basis_.push_back(std::move(o));
        levels_.push_back(total);
      }
    }
  }

  static void compositions(int remaining, std::size_t pos, Occupation& occ,
                           std::vector<Occupation>& out) {
    if (pos + 1 == occ.size()) {
      occ[pos] = remaining;
      out.push_back(occ);
      return;
    }
    for (int n = 0; n <= remaining; ++n) {
      occ[pos] = n;
      compositions(remaining - n, pos + 1, occ, out);
    }
  }

  void build_lowering() {
    const auto d = dim();
    for (int k = 0; k < modes(); ++k) {
      RMatrix a = RMatrix::Zero(d, d);
      for (Eigen::Index j = 0; j < d; ++j) {
        Occupation occ = basis_[static_cast<std::size_t>(j)];
        const int n = occ[static_cast<std::size_t>(k)];
        if (n == 0) continue;
        occ[static_cast<std::size_t>(k)] = n - 1;
        a(index_.at(occ), j) = std::sqrt(static_cast<Real>(n));
      }
      lowering_.push_back(std::move(a));
    }
  }

  LatticePtr lattice_;
  int n_max_;
  FockOptions options_;
  std::vector<Occupation> basis_;
  std::vector<int> levels_;
  std::map<Occupation, Eigen::Index> index_;
  std::vector<RMatrix> lowering_;
};

using FockSpacePtr = std::shared_ptr<const FockSpace>;

inline FockSpacePtr make_fock_space(LatticePtr lattice, int n_max, FockOptions options = {}) {
  return std::make_shared<const FockSpace>(std::move(lattice), n_max, options);
}

/// binomial(n_max + L, L)
inline std::size_t fock_dimension(int modes, int n_max) {
  std::size_t r = 1;
  for (int i = 1; i <= modes; ++i) r = r * static_cast<std::size_t>(n_max + i) / static_cast<std::size_t>(i);
  return r;
}

/// a(f) = Σ_k f_k A_k, linear in f.
inline FockOperator annihilate(const FockSpace& space, const LatticeFunction& f) {
  const CVector c = space.mode_coefficients(f);
  FockOperator out = FockOperator::Zero(space.dim(), space.dim());
  for (int k = 0; k < space.modes(); ++k) out += c(k) * space.lowering(k).cast<Complex>();
  return out;
}

/// a*(f) = Σ_k f_k A_k^T, linear in f (same coefficients as annihilate, no conjugation).
inline FockOperator create(const FockSpace& space, const LatticeFunction& f) {
  const CVector c = space.mode_coefficients(f);
  FockOperator out = FockOperator::Zero(space.dim(), space.dim());
  for (int k = 0; k < space.modes(); ++k) out += c(k) * space.lowering(k).transpose().cast<Complex>();
  return out;
}

inline Real operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

inline CMatrix compress(const CMatrix& m, const std::vector<Eigen::Index>& idx) {
  return m(idx, idx);
}

/// ‖[a(h), a*(f)] - pair(h,f)·I‖ compressed to particle number <= n_max - 1.
inline Real ccr_defect(const FockSpace& space, const LatticeFunction& h, const LatticeFunction& f) {
  const FockOperator a = annihilate(space, h);
  const FockOperator c = create(space, f);
  FockOperator d = a * c - c * a;
  d -= pair(space.spec(), h, f) * FockOperator::Identity(space.dim(), space.dim());
  return operator_norm(compress(d, space.indices_upto(space.n_max() - 1)));
}

/// Same defect on the whole truncated space (dominated by the top layer).
inline Real ccr_defect_full(const FockSpace& space, const LatticeFunction& h, const LatticeFunction& f) {
  const FockOperator a = annihilate(space, h);
  const FockOperator c = create(space, f);
  FockOperator d = a * c - c * a;
  d -= pair(space.spec(), h, f) * FockOperator::Identity(space.dim(), space.dim());
  return operator_norm(d);
}

enum class CoherentKind { Creation, Annihilation };

/// Σ_{j<=n_max} M^j / j!; terminates exactly because M is nilpotent on the graded basis.
inline FockOperator exp_nilpotent(const FockOperator& m, int max_power) {
  const auto d = m.rows();
  FockOperator out = FockOperator::Identity(d, d);
  FockOperator term = FockOperator::Identity(d, d);
  for (int j = 1; j <= max_power; ++j) {
    term = (term * m) / static_cast<Real>(j);
    out += term;
  }
  return out;
}

inline FockOperator coherent_exp(const FockSpace& space, const LatticeFunction& f, CoherentKind kind) {
  const FockOperator m = kind == CoherentKind::Creation ? create(space, f) : annihilate(space, f);
  return exp_nilpotent(m, space.n_max());
}

/// Particle energies Σ_k ω_k n_k of each basis state.
inline RVector free_energies(const FockSpace& space) {
  const RVector& w = space.lattice().frequencies();
  RVector e(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i) {
    const auto& occ = space.occupation(i);
    Real sum = 0.0;
    for (int k = 0; k < space.modes(); ++k) sum += w(k) * occ[static_cast<std::size_t>(k)];
    e(i) = sum;
  }
  return e;
}

/// H_0 = Σ_k ω_k A_k^T A_k, diagonal in the occupation basis.
inline FockOperator free_hamiltonian(const FockSpace& space) {
  return free_energies(space).cast<Complex>().asDiagonal();
}

/// e^{-β H_0}, exact by diagonality.
inline FockOperator free_semigroup(const FockSpace& space, Real beta) {
  RVector e = free_energies(space);
  return e.unaryExpr([beta](Real x) { return std::exp(-beta * x); }).cast<Complex>().asDiagonal();
}

inline FockOperator number_operator(const FockSpace& space) {
  CVector n(space.dim());
  for (Eigen::Index i = 0; i < space.dim(); ++i) n(i) = static_cast<Real>(space.level(i));
  return n.asDiagonal();
}

/// d_x = (2ω)^{-1/2} δ_x (exponent configurable through FockOptions).
inline LatticeFunction smeared_dirac(const FockSpace& space, int x) {
  const Real p = space.options().field_smearing;
  return space.lattice().apply([p](Real w) { return std::pow(2.0 * w, p); }, dirac(space.spec(), x));
}

/// c_x = pair(d_x, d_x), the coincident-point free two-point value.
inline Complex wick_constant(const FockSpace& space, int x) {
  const LatticeFunction d = smeared_dirac(space, x);
  return pair(space.spec(), d, d);
}

/// φ(x) = a(d_x) + a*(d_x).
inline FockOperator field_operator(const FockSpace& space, int x) {
  const LatticeFunction d = smeared_dirac(space, x);
  return annihilate(space, d) + create(space, d);
}

}  // namespace hkx
