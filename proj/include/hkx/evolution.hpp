#pragma once

#include <concepts>
#include <functional>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "hkx/fock.hpp"
#include "hkx/quadrature.hpp"

namespace hkx {

enum class Method { RK4, Midpoint };

/// TimeOrdered: ∂R/∂t₂ = -H(t₂) R, so factors at later times stand to the left.
/// AntiTimeOrdered: the reversed product, ∂R/∂t₂ = -R H(t₂).
enum class Ordering { TimeOrdered, AntiTimeOrdered };

struct EvolutionConfig {
  int steps = 400;
  Method method = Method::RK4;
  Ordering ordering = Ordering::TimeOrdered;

  void validate() const {
    if (steps < 1) throw std::invalid_argument("evolution.steps must be >= 1");
  }
};

/// Anything that maps a time s to an operator H(s).
template <class F>
concept OperatorFamily = requires(const F& f, Real s) {
  { f(s) } -> std::convertible_to<CMatrix>;
};

namespace detail {

// -H·R or -R·H depending on the ordering.
inline CMatrix generator_apply(const CMatrix& h, const CMatrix& r, Ordering ordering) {
  return ordering == Ordering::TimeOrdered ? CMatrix(-(h * r)) : CMatrix(-(r * h));
}

/// Integrates from t_from to t_to with a signed uniform step; t_to < t_from is allowed
/// and yields the inverse propagator.
template <OperatorFamily F>
CMatrix propagate(const F& family, Real t_from, Real t_to, const EvolutionConfig& cfg) {
  cfg.validate();
  CMatrix h_start = family(t_from);
  const auto dim = h_start.rows();
  CMatrix r = CMatrix::Identity(dim, dim);
  if (t_to == t_from) return r;
  const Real h = (t_to - t_from) / cfg.steps;
  const Ordering ord = cfg.ordering;
  for (int n = 0; n < cfg.steps; ++n) {
    const Real t = t_from + n * h;
    const Real t_next = (n + 1 == cfg.steps) ? t_to : t_from + (n + 1) * h;
    const CMatrix h0 = n == 0 ? h_start : CMatrix(family(t));
    const CMatrix hm = family(t + 0.5 * h);
    if (cfg.method == Method::Midpoint) {
      const CMatrix k1 = generator_apply(h0, r, ord);
      const CMatrix k2 = generator_apply(hm, r + 0.5 * h * k1, ord);
      r += h * k2;
      continue;
    }
    const CMatrix h1 = family(t_next);
    const CMatrix k1 = generator_apply(h0, r, ord);
    const CMatrix k2 = generator_apply(hm, r + 0.5 * h * k1, ord);
    const CMatrix k3 = generator_apply(hm, r + 0.5 * h * k2, ord);
    const CMatrix k4 = generator_apply(h1, r + h * k3, ord);
    r += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return r;
}

inline void check_interval(Real t1, Real t2) {
  if (!(t1 <= t2)) throw std::invalid_argument("invalid interval: t1 > t2");
}

}  // namespace detail

/// R(t₂, t₁) = T exp(-∫_{t₁}^{t₂} H(s) ds), or its anti-time-ordered counterpart.
///
/// R(t₃,t₁) = R(t₃,t₂) R(t₂,t₁) for the time-ordered case.
template <OperatorFamily F>
CMatrix time_ordered_exp(const F& family, Real t1, Real t2, const EvolutionConfig& cfg) {
  detail::check_interval(t1, t2);
  return detail::propagate(family, t1, t2, cfg);
}

/// Central-difference check of ∂R(t₂,t₁)/∂t₁ = R(t₂,t₁) H(t₁) (time-ordered case).
template <OperatorFamily F>
Real right_ode_residual(const F& family, Real t1, Real t2, const EvolutionConfig& cfg, Real eps) {
  detail::check_interval(t1, t2);
  EvolutionConfig c = cfg;
  c.ordering = Ordering::TimeOrdered;
  const CMatrix plus = detail::propagate(family, t1 + eps, t2, c);
  const CMatrix minus = detail::propagate(family, t1 - eps, t2, c);
  const CMatrix r = detail::propagate(family, t1, t2, c);
  const CMatrix derivative = (plus - minus) / (2.0 * eps);
  return operator_norm(derivative - r * CMatrix(family(t1)));
}

/// Central-difference check of ∂R(t₂,t₁)/∂t₂ = -H(t₂) R(t₂,t₁) (time-ordered case).
template <OperatorFamily F>
Real left_ode_residual(const F& family, Real t1, Real t2, const EvolutionConfig& cfg, Real eps) {
  detail::check_interval(t1, t2);
  EvolutionConfig c = cfg;
  c.ordering = Ordering::TimeOrdered;
  const CMatrix plus = detail::propagate(family, t1, t2 + eps, c);
  const CMatrix minus = detail::propagate(family, t1, t2 - eps, c);
  const CMatrix r = detail::propagate(family, t1, t2, c);
  const CMatrix derivative = (plus - minus) / (2.0 * eps);
  return operator_norm(derivative + CMatrix(family(t2)) * r);
}

namespace detail {

template <OperatorFamily F>
CMatrix dyson_level(const F& family, Real t1, Real t, int order, const QuadratureRule& rule) {
  CMatrix h_any = family(t1);
  const auto dim = h_any.rows();
  CMatrix out = CMatrix::Identity(dim, dim);
  if (order == 0 || t == t1) return out;
  const Real half = 0.5 * (t - t1);
  const Real mid = 0.5 * (t + t1);
  CMatrix integral = CMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Real s = mid + half * rule.nodes[i];
    integral += rule.weights[i] * (CMatrix(family(s)) * dyson_level(family, t1, s, order - 1, rule));
  }
  out -= half * integral;
  return out;
}

}  // namespace detail

/// Dyson partial sum Σ_{j<=order} (-1)^j ∫_{t₁<=s_j<=...<=s₁<=t₂} H(s₁)...H(s_j),
/// computed as D_m(t) = I - ∫_{t₁}^{t} H(s) D_{m-1}(s) ds with nested Gauss-Legendre.
template <OperatorFamily F>
CMatrix dyson_partial(const F& family, Real t1, Real t2, int order, int quad_points) {
  detail::check_interval(t1, t2);
  if (order < 0 || order > 4) throw std::invalid_argument("dyson_partial: order must be in [0, 4]");
  return detail::dyson_level(family, t1, t2, order, gauss_legendre(quad_points));
}

/// Direct matrix exponential e^{-τ H}, used for time-independent generators.
inline CMatrix semigroup(const CMatrix& h, Real tau) {
  const CMatrix scaled = -tau * h;
  return scaled.exp();
}

}  // namespace hkx
