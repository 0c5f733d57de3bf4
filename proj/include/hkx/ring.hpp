#pragma once

#include <stdexcept>
#include <vector>

#include "hkx/types.hpp"

namespace hkx {

/// Element of the commutative ring of function sequences, truncated at index degree_cap.
///
/// Components 0..degree_cap are stored densely. Products are Cauchy products computed
/// up to degree_cap; nothing beyond degree_cap is ever read or produced.
class RingElement {
 public:
  RingElement(int sites, int degree_cap) : degree_cap_(degree_cap) {
    if (sites < 1) throw std::invalid_argument("RingElement: sites must be >= 1");
    if (degree_cap < 0) throw std::invalid_argument("RingElement: degree cap must be >= 0");
    components_.assign(static_cast<std::size_t>(degree_cap) + 1, LatticeFunction::Zero(sites));
  }

  static RingElement zero(int sites, int degree_cap) { return RingElement(sites, degree_cap); }

  static RingElement identity(int sites, int degree_cap) {
    RingElement e(sites, degree_cap);
    e.components_[0].setOnes();
    return e;
  }

  int degree_cap() const { return degree_cap_; }
  int sites() const { return static_cast<int>(components_.front().size()); }

  const LatticeFunction& operator[](int j) const { return components_.at(static_cast<std::size_t>(j)); }
  LatticeFunction& operator[](int j) { return components_.at(static_cast<std::size_t>(j)); }

  /// Component j, or zero beyond the cap.
  LatticeFunction component(int j) const {
    if (j < 0) throw std::out_of_range("negative ring component");
    if (j > degree_cap_) return LatticeFunction::Zero(sites());
    return components_[static_cast<std::size_t>(j)];
  }

  RingElement& operator+=(const RingElement& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < components_.size(); ++j) components_[j] += o.components_[j];
    return *this;
  }
  RingElement& operator-=(const RingElement& o) {
    check_compatible(o);
    for (std::size_t j = 0; j < components_.size(); ++j) components_[j] -= o.components_[j];
    return *this;
  }
  RingElement& operator*=(Complex c) {
    for (auto& v : components_) v *= c;
    return *this;
  }

  friend RingElement operator+(RingElement a, const RingElement& b) { return a += b; }
  friend RingElement operator-(RingElement a, const RingElement& b) { return a -= b; }
  friend RingElement operator*(Complex c, RingElement a) { return a *= c; }

  Real max_abs_difference(const RingElement& o) const {
    check_compatible(o);
    Real m = 0.0;
    for (std::size_t j = 0; j < components_.size(); ++j)
      m = std::max(m, (components_[j] - o.components_[j]).cwiseAbs().maxCoeff());
    return m;
  }

  void check_compatible(const RingElement& o) const {
    if (o.degree_cap_ != degree_cap_ || o.sites() != sites())
      throw std::invalid_argument("ring elements have different shape");
  }

 private:
  int degree_cap_;
  std::vector<LatticeFunction> components_;
};

/// (λv)_j(x) = λ(x) v_j(x)
inline RingElement scalar_mult(const LatticeFunction& lambda, const RingElement& v) {
  if (lambda.size() != v.sites()) throw std::invalid_argument("scalar_mult: length mismatch");
  RingElement out = v;
  for (int j = 0; j <= v.degree_cap(); ++j) out[j] = lambda.cwiseProduct(v[j]);
  return out;
}

/// Cauchy product (u*v)_j = Σ_{k<=j} u_k v_{j-k}.
inline RingElement star(const RingElement& u, const RingElement& v) {
  u.check_compatible(v);
  RingElement out(u.sites(), u.degree_cap());
  for (int j = 0; j <= u.degree_cap(); ++j)
    for (int k = 0; k <= j; ++k) out[j] += u[k].cwiseProduct(v[j - k]);
  return out;
}

/// n-fold star power; power 0 is the identity.
inline RingElement star_pow(const RingElement& u, int n) {
  if (n < 0) throw std::invalid_argument("star_pow: negative exponent");
  RingElement out = RingElement::identity(u.sites(), u.degree_cap());
  for (int i = 0; i < n; ++i) out = star(out, u);
  return out;
}

/// ι(f) = {0, f, 0, ...}
inline RingElement iota(const LatticeFunction& f, int degree_cap) {
  if (degree_cap < 1) throw std::invalid_argument("iota requires degree cap >= 1");
  RingElement out(static_cast<int>(f.size()), degree_cap);
  out[1] = f;
  return out;
}

/// Γ(f) = {1, f, f^2/2!, ..., f^j/j!}
inline RingElement gamma(const LatticeFunction& f, int degree_cap) {
  RingElement out = RingElement::identity(static_cast<int>(f.size()), degree_cap);
  for (int j = 1; j <= degree_cap; ++j) out[j] = out[j - 1].cwiseProduct(f) / static_cast<Real>(j);
  return out;
}

}  // namespace hkx
