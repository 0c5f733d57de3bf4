#pragma once

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkx/fock.hpp"
#include "hkx/ring.hpp"

namespace hkx {

/// Polynomial coefficients c_0, c_1, ..., c_d (lowest degree first).
using Coefficients = std::vector<Complex>;

/// Formal j-th derivative; empty (zero polynomial) when j exceeds the degree.
inline Coefficients poly_derivative(const Coefficients& p, int j) {
  if (j < 0) throw std::invalid_argument("poly_derivative: negative order");
  if (static_cast<std::size_t>(j) >= p.size()) return {};
  Coefficients out(p.size() - static_cast<std::size_t>(j));
  for (std::size_t n = 0; n < out.size(); ++n) {
    Real factor = 1.0;
    for (std::size_t m = n + 1; m <= n + static_cast<std::size_t>(j); ++m) factor *= static_cast<Real>(m);
    out[n] = factor * p[n + static_cast<std::size_t>(j)];
  }
  return out;
}

/// Monic interaction polynomial ξ^{2k} + Σ_{j<2k} c_j ξ^j of even positive degree.
class PolynomialSpec {
 public:
  explicit PolynomialSpec(Coefficients coefficients) : coefficients_(std::move(coefficients)) {
    while (coefficients_.size() > 1 && coefficients_.back() == Complex{0.0})
      coefficients_.pop_back();
    const int d = degree();
    if (d < 1 || d % 2 != 0)
      throw std::invalid_argument("polynomial degree must be even and positive, got " + std::to_string(d));
    if (coefficients_.back() != Complex{1.0})
      throw std::invalid_argument("polynomial must be monic (leading coefficient 1)");
  }

  /// ξ^{degree}
  static PolynomialSpec monomial(int degree) {
    Coefficients c(static_cast<std::size_t>(degree) + 1, Complex{0.0});
    c.back() = 1.0;
    return PolynomialSpec(std::move(c));
  }

  int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
  const Coefficients& coefficients() const { return coefficients_; }
  Coefficients derivative(int j) const { return poly_derivative(coefficients_, j); }

  bool is_real() const {
    for (const auto& c : coefficients_)
      if (c.imag() != 0.0) return false;
    return true;
  }

  PolynomialSpec conjugate() const {
    Coefficients c = coefficients_;
    for (auto& v : c) v = std::conj(v);
    return PolynomialSpec(std::move(c));
  }

 private:
  Coefficients coefficients_;
};

inline Real binomial(int n, int k) {
  Real r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<Real>(n - k + i) / static_cast<Real>(i);
  return r;
}

/// :φ(x)^n: = Σ_j C(n,j) a*(d_x)^j a(d_x)^{n-j}.
///
/// Built from normal-ordered monomials, so the result is the exact compression of the
/// untruncated operator onto the truncated space.
inline FockOperator wick_power(const FockSpace& space, int x, int n) {
  if (n < 0) throw std::invalid_argument("wick_power: negative power");
  const LatticeFunction d = smeared_dirac(space, x);
  const FockOperator a = annihilate(space, d);
  const FockOperator c = create(space, d);
  const auto dim = space.dim();

  std::vector<FockOperator> a_pow{FockOperator::Identity(dim, dim)};
  std::vector<FockOperator> c_pow{FockOperator::Identity(dim, dim)};
  for (int j = 1; j <= n; ++j) {
    a_pow.push_back(a_pow.back() * a);
    c_pow.push_back(c_pow.back() * c);
  }
  FockOperator out = FockOperator::Zero(dim, dim);
  for (int j = 0; j <= n; ++j) out += binomial(n, j) * (c_pow[static_cast<std::size_t>(j)] * a_pow[static_cast<std::size_t>(n - j)]);
  return out;
}

/// Hermite-type recursion :φ^{n+1}: = φ :φ^n: - n c_x :φ^{n-1}:, evaluated with truncated
/// matrices. Agrees with wick_power away from the top n particle-number layers.
/// `constant_scale` multiplies c_x and is only used to demonstrate wrong conventions.
inline FockOperator wick_power_recursive(const FockSpace& space, int x, int n, Real constant_scale = 1.0) {
  if (n < 0) throw std::invalid_argument("wick_power_recursive: negative power");
  const auto dim = space.dim();
  const FockOperator phi = field_operator(space, x);
  const Complex c = constant_scale * wick_constant(space, x);
  FockOperator prev = FockOperator::Identity(dim, dim);
  if (n == 0) return prev;
  FockOperator cur = phi;
  for (int m = 1; m < n; ++m) {
    FockOperator next = phi * cur - (static_cast<Real>(m) * c) * prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// Cached :φ(x)^n: for every site and every power up to max_power, plus H_0.
class WickTable {
 public:
  WickTable(FockSpacePtr space, int max_power) : space_(std::move(space)), max_power_(max_power) {
    if (!space_) throw std::invalid_argument("WickTable: null space");
    const int sites = space_->modes();
    powers_.resize(static_cast<std::size_t>(sites));
    for (int x = 0; x < sites; ++x)
      for (int n = 0; n <= max_power; ++n) powers_[static_cast<std::size_t>(x)].push_back(wick_power(*space_, x, n));
    h0_ = hkx::free_hamiltonian(*space_);
  }

  const FockSpace& space() const { return *space_; }
  const FockSpacePtr& space_ptr() const { return space_; }
  int max_power() const { return max_power_; }
  const FockOperator& power(int x, int n) const {
    return powers_.at(static_cast<std::size_t>(x)).at(static_cast<std::size_t>(n));
  }
  const FockOperator& free_hamiltonian() const { return h0_; }

 private:
  FockSpacePtr space_;
  int max_power_;
  std::vector<std::vector<FockOperator>> powers_;
  FockOperator h0_;
};

using WickTablePtr = std::shared_ptr<const WickTable>;

inline WickTablePtr make_wick_table(FockSpacePtr space, int max_power) {
  return std::make_shared<const WickTable>(std::move(space), max_power);
}

/// H_I(p, w) = dx Σ_x w(x) Σ_n p_n :φ(x)^n:
inline FockOperator interaction(const WickTable& table, const Coefficients& p, const LatticeFunction& weight) {
  const FockSpace& space = table.space();
  space.lattice().check_length(weight);
  if (static_cast<int>(p.size()) - 1 > table.max_power())
    throw std::invalid_argument("interaction: polynomial degree exceeds cached Wick powers");
  const Real dx = space.spec().spacing;
  FockOperator out = FockOperator::Zero(space.dim(), space.dim());
  for (int x = 0; x < space.modes(); ++x) {
    if (weight(x) == Complex{0.0}) continue;
    for (std::size_t n = 0; n < p.size(); ++n) {
      if (p[n] == Complex{0.0}) continue;
      out += (dx * weight(x) * p[n]) * table.power(x, static_cast<int>(n));
    }
  }
  return out;
}

inline FockOperator interaction(const FockSpace& space, const Coefficients& p, const LatticeFunction& weight) {
  const WickTable table(std::make_shared<const FockSpace>(space), std::max<int>(0, static_cast<int>(p.size()) - 1));
  return interaction(table, p, weight);
}

/// Bold interaction Σ_{j=0}^{deg} H_I(P^{(j)}, λ g_j). Components of g beyond the degree
/// multiply the zero polynomial and are ignored.
inline FockOperator bold_interaction(const WickTable& table, const PolynomialSpec& poly,
                                     const LatticeFunction& lambda, const RingElement& g) {
  const FockSpace& space = table.space();
  space.lattice().check_length(lambda);
  if (g.sites() != space.modes()) throw std::invalid_argument("bold_interaction: lattice mismatch");
  const int deg = poly.degree();
  if (deg > table.max_power()) throw std::invalid_argument("bold_interaction: degree exceeds cached Wick powers");

  // Collapse to one coefficient per (site, power): dx λ(x) Σ_j P^{(j)}_n g_j(x).
  const Real dx = space.spec().spacing;
  std::vector<Coefficients> derivs;
  for (int j = 0; j <= deg; ++j) derivs.push_back(poly.derivative(j));

  FockOperator out = FockOperator::Zero(space.dim(), space.dim());
  for (int x = 0; x < space.modes(); ++x) {
    if (lambda(x) == Complex{0.0}) continue;
    for (int n = 0; n <= deg; ++n) {
      Complex coeff{0.0};
      for (int j = 0; j <= std::min(deg, g.degree_cap()); ++j) {
        const auto& dj = derivs[static_cast<std::size_t>(j)];
        if (static_cast<std::size_t>(n) < dj.size()) coeff += dj[static_cast<std::size_t>(n)] * g[j](x);
      }
      if (coeff == Complex{0.0}) continue;
      out += (dx * lambda(x) * coeff) * table.power(x, n);
    }
  }
  return out;
}

/// s ↦ H_0 + H_I(P, λ Γ(Σ_i profile_i(s))), defined for 0 <= s <= beta.
class HamiltonianFamily {
 public:
  HamiltonianFamily(WickTablePtr table, PolynomialSpec poly, LatticeFunction lambda,
                    std::vector<ProfileTerm> profiles, Real beta)
      : table_(std::move(table)), poly_(std::move(poly)), lambda_(std::move(lambda)),
        profiles_(std::move(profiles)), beta_(beta) {
    if (!table_) throw std::invalid_argument("HamiltonianFamily: null Wick table");
    if (!(beta_ > 0.0)) throw std::invalid_argument("HamiltonianFamily: beta must be > 0");
    table_->space().lattice().check_length(lambda_);
    for (const auto& p : profiles_) table_->space().lattice().check_length(p.base);
  }

  const WickTable& table() const { return *table_; }
  const WickTablePtr& table_ptr() const { return table_; }
  const FockSpace& space() const { return table_->space(); }
  const PolynomialSpec& poly() const { return poly_; }
  const LatticeFunction& lambda() const { return lambda_; }
  const std::vector<ProfileTerm>& profiles() const { return profiles_; }
  Real beta() const { return beta_; }

  /// Argument of Γ at time s: Σ_i profile_i(s).
  LatticeFunction profile_sum(Real s) const {
    s = clamp_time(s);
    LatticeFunction sum = LatticeFunction::Zero(space().modes());
    for (const auto& p : profiles_) sum += profile_at(p, s, space().lattice());
    return sum;
  }

  FockOperator interaction_at(Real s) const {
    return bold_interaction(*table_, poly_, lambda_, gamma(profile_sum(s), poly_.degree()));
  }

  FockOperator evaluate(Real s) const { return table_->free_hamiltonian() + interaction_at(s); }

  FockOperator operator()(Real s) const { return evaluate(s); }

  /// Family with profile bases and polynomial coefficients conjugated; for real λ its
  /// members are the adjoints of this family's members.
  HamiltonianFamily conjugated() const {
    std::vector<ProfileTerm> p = profiles_;
    for (auto& t : p) t.base = t.base.conjugate();
    return HamiltonianFamily(table_, poly_.conjugate(), lambda_.conjugate(), std::move(p), beta_);
  }

 private:
  // Grid points may overshoot the interval ends by rounding.
  Real clamp_time(Real s) const {
    constexpr Real slack = 1e-12;
    if (s < -slack || s > beta_ + slack)
      throw std::out_of_range("family evaluated outside [0, beta]: s = " + std::to_string(s));
    return std::clamp(s, 0.0, beta_);
  }

  WickTablePtr table_;
  PolynomialSpec poly_;
  LatticeFunction lambda_;
  std::vector<ProfileTerm> profiles_;
  Real beta_;
};

}  // namespace hkx
