#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <future>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "hkx/evolution.hpp"
#include "hkx/interactions.hpp"

namespace hkx {

/// Names of the identity checks, in suite order.
inline const std::vector<std::string>& identity_names() {
  static const std::vector<std::string> names{
      "free_exchange",   "hi_commutator", "pull_through",        "exchange",
      "exchange_special", "g_flatness",   "derivative_relation", "adjoint_step"};
  return names;
}

/// Free symbols and numerical parameters of one identity scenario.
struct Scenario {
  std::string id = "scenario";
  LatticeSpec lattice;
  int n_max = 14;
  PolynomialSpec poly = PolynomialSpec::monomial(4);
  LatticeFunction lambda;  // real, >= 0
  LatticeFunction f;
  LatticeFunction h;
  LatticeFunction g;
  Real beta = 0.25;
  EvolutionConfig evolution;
  int probe_cap = -1;  // < 0 selects floor(n_max / 3)
  std::uint64_t seed = 20240613;
  FockOptions fock;

  int guard_band() const { return poly.degree() + 2; }

  int effective_probe_cap() const { return probe_cap < 0 ? n_max / 3 : probe_cap; }

  /// Throws std::invalid_argument naming the violated constraint.
  void validate() const {
    lattice.validate();
    evolution.validate();
    if (n_max < 1) throw std::invalid_argument("fock.n_max must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("evolution.beta must be > 0");
    const auto check_len = [&](const LatticeFunction& v, const char* name) {
      if (v.size() != lattice.sites)
        throw std::invalid_argument(std::string("functions.") + name + " must have one value per site");
    };
    check_len(lambda, "lambda");
    check_len(f, "f");
    check_len(h, "h");
    check_len(g, "g");
    for (Eigen::Index x = 0; x < lambda.size(); ++x)
      if (lambda(x).imag() != 0.0 || lambda(x).real() < 0.0)
        throw std::invalid_argument("functions.lambda must be real and >= 0");
    const int cap = effective_probe_cap();
    if (cap < 0) throw std::invalid_argument("fock.probe_cap must be >= 0");
    if (cap > n_max - guard_band())
      throw std::invalid_argument("fock.probe_cap must be <= n_max - degree - 2 (guard band), got " +
                                  std::to_string(cap) + " with n_max " + std::to_string(n_max));
  }

  /// Zero functions on the current lattice with λ = value everywhere.
  void reset_functions(Real lambda_value = 0.0) {
    lambda = LatticeFunction::Constant(lattice.sites, lambda_value);
    f = h = g = LatticeFunction::Zero(lattice.sites);
  }
};

/// Outcome of one identity check.
struct VerificationReport {
  std::string scenario_id;
  std::string identity;
  Real residual_probe = 0.0;
  Real residual_compressed = 0.0;
  /// Rows (parameter..., residual), sorted by parameter.
  std::vector<std::vector<Real>> convergence;
  /// Auxiliary named metrics (link residuals, derivative estimates, ...).
  std::map<std::string, Real> details;
  Real wall_ms = 0.0;
};

/// Probe vectors: the vacuum, every one-particle basis state, and pseudo-random
/// normalized vectors supported on particle number <= cap.
struct ProbeSet {
  int cap = 0;
  std::vector<Eigen::Index> indices;
  CMatrix vectors;  // one probe per column
};

inline ProbeSet make_probes(const FockSpace& space, int cap, std::uint64_t seed, int random_count = 8) {
  ProbeSet p;
  p.cap = cap;
  p.indices = space.indices_upto(cap);
  std::vector<CVector> cols;
  cols.push_back(space.vacuum());
  if (cap >= 1)
    for (Eigen::Index i = 0; i < space.dim(); ++i)
      if (space.level(i) == 1) cols.push_back(space.basis_vector(i));
  std::mt19937_64 rng(seed);
  std::normal_distribution<Real> normal(0.0, 1.0);
  for (int r = 0; r < random_count; ++r) {
    CVector v = CVector::Zero(space.dim());
    for (auto i : p.indices) v(i) = Complex(normal(rng), normal(rng));
    v.normalize();
    cols.push_back(std::move(v));
  }
  p.vectors.resize(space.dim(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) p.vectors.col(static_cast<Eigen::Index>(c)) = cols[c];
  return p;
}

/// max_v ‖(L - R) v‖ / max(1, ‖R v‖) over the probe vectors.
inline Real probe_residual(const CMatrix& lhs, const CMatrix& rhs, const ProbeSet& probes) {
  const CMatrix diff = (lhs - rhs) * probes.vectors;
  const CMatrix ref = rhs * probes.vectors;
  Real worst = 0.0;
  for (Eigen::Index c = 0; c < diff.cols(); ++c)
    worst = std::max(worst, diff.col(c).norm() / std::max<Real>(1.0, ref.col(c).norm()));
  return worst;
}

/// Operator norm of (L - R) restricted to the probe columns.
inline Real compressed_residual(const CMatrix& lhs, const CMatrix& rhs, const ProbeSet& probes) {
  const CMatrix d = lhs - rhs;
  return operator_norm(d(Eigen::all, probes.indices));
}

/// Lattice, Fock space, cached Wick powers and probes for one scenario.
class ScenarioContext {
 public:
  explicit ScenarioContext(const Scenario& sc) : sc_(sc) {
    sc_.validate();
    lattice_ = make_lattice(sc_.lattice);
    space_ = make_fock_space(lattice_, sc_.n_max, sc_.fock);
    table_ = make_wick_table(space_, sc_.poly.degree());
    probes_ = make_probes(*space_, sc_.effective_probe_cap(), sc_.seed);
  }

  const Scenario& scenario() const { return sc_; }
  const Lattice& lattice() const { return *lattice_; }
  const FockSpace& space() const { return *space_; }
  const WickTablePtr& table() const { return table_; }
  const ProbeSet& probes() const { return probes_; }
  Real beta() const { return sc_.beta; }

  ProfileTerm forward(const LatticeFunction& v) const { return {v, Direction::Forward, sc_.beta}; }
  ProfileTerm backward(const LatticeFunction& v) const { return {v, Direction::Backward, sc_.beta}; }

  HamiltonianFamily family(std::vector<ProfileTerm> profiles) const {
    return HamiltonianFamily(table_, sc_.poly, sc_.lambda, std::move(profiles), sc_.beta);
  }

  CMatrix t_exp(const HamiltonianFamily& fam, Real t1, Real t2, int steps) const {
    EvolutionConfig cfg = sc_.evolution;
    cfg.steps = std::max(1, steps);
    cfg.ordering = Ordering::TimeOrdered;
    return time_ordered_exp(fam, t1, t2, cfg);
  }

  CMatrix t_exp(const HamiltonianFamily& fam) const { return t_exp(fam, 0.0, sc_.beta, sc_.evolution.steps); }

  /// e^{a*(v)}
  CMatrix exp_create(const LatticeFunction& v) const { return coherent_exp(*space_, v, CoherentKind::Creation); }
  /// e^{a(v)}
  CMatrix exp_annihilate(const LatticeFunction& v) const {
    return coherent_exp(*space_, v, CoherentKind::Annihilation);
  }

  LatticeFunction heat(const LatticeFunction& v, Real s) const { return lattice_->heat_flow(v, s); }

  void fill(VerificationReport& r, const std::string& identity, const CMatrix& lhs, const CMatrix& rhs) const {
    r.scenario_id = sc_.id;
    r.identity = identity;
    r.residual_probe = probe_residual(lhs, rhs, probes_);
    r.residual_compressed = compressed_residual(lhs, rhs, probes_);
  }

 private:
  Scenario sc_;
  LatticePtr lattice_;
  FockSpacePtr space_;
  WickTablePtr table_;
  ProbeSet probes_;
};

/// Scalar prefactor of the exchange identities, e^{+pair(h, e^{-βω} f)}.
///
/// The sign follows from [a(h), a*(f)] = pair(h, f): moving e^{a(h)} to the right of
/// e^{a*(f')} produces e^{+pair(h, f')}.
inline Complex exchange_prefactor(const Lattice& lattice, const LatticeFunction& h, const LatticeFunction& f,
                                  Real beta) {
  return std::exp(pair(lattice.spec(), h, lattice.heat_flow(f, beta)));
}

struct IdentitySides {
  CMatrix lhs;
  CMatrix rhs;
};

namespace detail {

class Stopwatch {
 public:
  Real elapsed_ms() const {
    return std::chrono::duration<Real, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// e^{a(h)} e^{-βH₀} e^{a*(f)}  vs  e^{pair(h,e^{-βω}f)} e^{a*(e^{-βω}f)} e^{-βH₀} e^{a(e^{-βω}h)}
inline IdentitySides free_exchange_sides(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  const Real beta = sc.beta;
  const CMatrix semi = free_semigroup(ctx.space(), beta);
  IdentitySides s;
  s.lhs = ctx.exp_annihilate(sc.h) * semi * ctx.exp_create(sc.f);
  s.rhs = exchange_prefactor(ctx.lattice(), sc.h, sc.f, beta) *
          (ctx.exp_create(ctx.heat(sc.f, beta)) * semi * ctx.exp_annihilate(ctx.heat(sc.h, beta)));
  return s;
}

inline VerificationReport verify_free_exchange(const Scenario& sc) {
  detail::Stopwatch clock;
  ScenarioContext ctx(sc);
  const auto sides = free_exchange_sides(ctx);
  VerificationReport r;
  ctx.fill(r, "free_exchange", sides.lhs, sides.rhs);
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Creation form: H_I(Γ(g_s)) e^{a*(e^{-tω}f)} vs e^{a*(e^{-tω}f)} H_I(Γ(f_t + g_s)).
inline IdentitySides hi_creation_sides(const ScenarioContext& ctx, Real s, Real t) {
  const auto& sc = ctx.scenario();
  const int deg = sc.poly.degree();
  const LatticeFunction g_s = profile_at(ctx.forward(sc.g), s, ctx.lattice());
  const LatticeFunction f_t = profile_at(ctx.forward(sc.f), t, ctx.lattice());
  const CMatrix y = ctx.exp_create(ctx.heat(sc.f, t));
  IdentitySides out;
  out.lhs = bold_interaction(*ctx.table(), sc.poly, sc.lambda, gamma(g_s, deg)) * y;
  out.rhs = y * bold_interaction(*ctx.table(), sc.poly, sc.lambda, gamma(f_t + g_s, deg));
  return out;
}

/// Annihilation form: e^{a(e^{-tω}h)} H_I(Γ(g_s)) vs H_I(Γ(h_t + g_s)) e^{a(e^{-tω}h)}.
inline IdentitySides hi_annihilation_sides(const ScenarioContext& ctx, Real s, Real t) {
  const auto& sc = ctx.scenario();
  const int deg = sc.poly.degree();
  const LatticeFunction g_s = profile_at(ctx.forward(sc.g), s, ctx.lattice());
  const LatticeFunction h_t = profile_at(ctx.forward(sc.h), t, ctx.lattice());
  const CMatrix y = ctx.exp_annihilate(ctx.heat(sc.h, t));
  IdentitySides out;
  out.lhs = y * bold_interaction(*ctx.table(), sc.poly, sc.lambda, gamma(g_s, deg));
  out.rhs = bold_interaction(*ctx.table(), sc.poly, sc.lambda, gamma(h_t + g_s, deg)) * y;
  return out;
}

inline VerificationReport verify_hi_commutator(const Scenario& sc, Real s, Real t) {
  detail::Stopwatch clock;
  if (s < 0.0 || s > sc.beta || t < 0.0 || t > sc.beta)
    throw std::invalid_argument("verify_hi_commutator: s and t must lie in [0, beta]");
  ScenarioContext ctx(sc);
  const auto cre = hi_creation_sides(ctx, s, t);
  const auto ann = hi_annihilation_sides(ctx, s, t);
  VerificationReport r;
  r.scenario_id = sc.id;
  r.identity = "hi_commutator";
  const Real cre_probe = probe_residual(cre.lhs, cre.rhs, ctx.probes());
  const Real ann_probe = probe_residual(ann.lhs, ann.rhs, ctx.probes());
  r.residual_probe = std::max(cre_probe, ann_probe);
  r.residual_compressed = std::max(compressed_residual(cre.lhs, cre.rhs, ctx.probes()),
                                   compressed_residual(ann.lhs, ann.rhs, ctx.probes()));
  r.details["creation_residual"] = cre_probe;
  r.details["annihilation_residual"] = ann_probe;
  r.wall_ms = clock.elapsed_ms();
  return r;
}

inline VerificationReport verify_hi_commutator(const Scenario& sc) {
  return verify_hi_commutator(sc, sc.beta / 3.0, sc.beta / 2.0);
}

/// e^{a(h)} T[H(g_s)]  vs  T[H(g_s + h_{β-s})] e^{a(e^{-βω}h)}
inline IdentitySides pull_through_sides(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  const auto left_family = ctx.family({ctx.forward(sc.g)});
  const auto right_family = ctx.family({ctx.forward(sc.g), ctx.backward(sc.h)});
  IdentitySides s;
  s.lhs = ctx.exp_annihilate(sc.h) * ctx.t_exp(left_family);
  s.rhs = ctx.t_exp(right_family) * ctx.exp_annihilate(ctx.heat(sc.h, sc.beta));
  return s;
}

inline VerificationReport verify_pull_through(const Scenario& sc) {
  detail::Stopwatch clock;
  ScenarioContext ctx(sc);
  const auto sides = pull_through_sides(ctx);
  VerificationReport r;
  ctx.fill(r, "pull_through", sides.lhs, sides.rhs);
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Right-hand side shared by the exchange theorem and its g = Id special case:
/// e^{pair(h,e^{-βω}f)} e^{a*(e^{-βω}f)} T[H(f_s + g_s + h_{β-s})] e^{a(e^{-βω}h)}
inline CMatrix exchange_rhs(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  const Real beta = sc.beta;
  const auto family = ctx.family({ctx.forward(sc.f), ctx.forward(sc.g), ctx.backward(sc.h)});
  return exchange_prefactor(ctx.lattice(), sc.h, sc.f, beta) *
         (ctx.exp_create(ctx.heat(sc.f, beta)) * ctx.t_exp(family) * ctx.exp_annihilate(ctx.heat(sc.h, beta)));
}

/// e^{a(h)} T[H(g_s)] e^{a*(f)}  vs  exchange_rhs
inline IdentitySides exchange_sides(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  const auto left_family = ctx.family({ctx.forward(sc.g)});
  IdentitySides s;
  s.lhs = ctx.exp_annihilate(sc.h) * ctx.t_exp(left_family) * ctx.exp_create(sc.f);
  s.rhs = exchange_rhs(ctx);
  return s;
}

inline VerificationReport verify_exchange(const Scenario& sc) {
  detail::Stopwatch clock;
  ScenarioContext ctx(sc);
  const auto sides = exchange_sides(ctx);
  VerificationReport r;
  ctx.fill(r, "exchange", sides.lhs, sides.rhs);
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// e^{a(h)} e^{-β(H₀ + H_I(P,λ))} e^{a*(f)}  vs  exchange_rhs with g = 0.
inline IdentitySides exchange_special_sides(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  if (sc.g.size() > 0 && !sc.g.isZero(0.0))
    throw std::invalid_argument("exchange_special requires g = 0");
  const CMatrix h_total = ctx.table()->free_hamiltonian() + interaction(*ctx.table(), sc.poly.coefficients(), sc.lambda);
  IdentitySides s;
  s.lhs = ctx.exp_annihilate(sc.h) * semigroup(h_total, sc.beta) * ctx.exp_create(sc.f);
  s.rhs = exchange_rhs(ctx);
  return s;
}

inline VerificationReport verify_exchange_special(const Scenario& sc) {
  detail::Stopwatch clock;
  Scenario local = sc;
  local.g = LatticeFunction::Zero(sc.lattice.sites);
  ScenarioContext ctx(local);
  const auto sides = exchange_special_sides(ctx);
  VerificationReport r;
  ctx.fill(r, "exchange_special", sides.lhs, sides.rhs);
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// G(s') = R(β, s') e^{a*(e^{-s'ω}f)} S(s', 0) with h = 0, where R evolves with H(g_s) and
/// S with H(f_s + g_s). Step counts are proportional to the interval length so that sample
/// points on the base grid reuse the same step size.
class GFunction {
 public:
  explicit GFunction(const ScenarioContext& ctx)
      : ctx_(ctx),
        outer_(ctx.family({ctx.forward(ctx.scenario().g)})),
        inner_(ctx.family({ctx.forward(ctx.scenario().f), ctx.forward(ctx.scenario().g)})) {}

  int steps_for(Real length) const {
    const auto& sc = ctx_.scenario();
    return std::max(1, static_cast<int>(std::lround(sc.evolution.steps * length / sc.beta)));
  }

  CMatrix operator()(Real s) const { return at(s, steps_for(ctx_.beta() - s), steps_for(s)); }

  CMatrix at(Real s, int outer_steps, int inner_steps) const {
    const Real beta = ctx_.beta();
    const CMatrix r = ctx_.t_exp(outer_, s, beta, outer_steps);
    const CMatrix y = ctx_.exp_create(ctx_.heat(ctx_.scenario().f, s));
    const CMatrix sv = ctx_.t_exp(inner_, 0.0, s, inner_steps);
    return r * y * sv;
  }

 private:
  const ScenarioContext& ctx_;
  HamiltonianFamily outer_;
  HamiltonianFamily inner_;
};

inline VerificationReport verify_g_flatness(const Scenario& sc, int sample_count = 5, Real eps = 1e-3) {
  detail::Stopwatch clock;
  if (sample_count < 2) throw std::invalid_argument("verify_g_flatness: need at least two samples");
  Scenario local = sc;
  local.h = LatticeFunction::Zero(sc.lattice.sites);
  ScenarioContext ctx(local);
  GFunction G(ctx);

  std::vector<Real> times;
  std::vector<CMatrix> values;
  for (int i = 0; i < sample_count; ++i) {
    const Real s = sc.beta * i / (sample_count - 1);
    times.push_back(s);
    values.push_back(G(s));
  }
  VerificationReport r;
  r.scenario_id = sc.id;
  r.identity = "g_flatness";
  for (std::size_t i = 0; i < values.size(); ++i)
    for (std::size_t j = i + 1; j < values.size(); ++j) {
      r.residual_probe = std::max(r.residual_probe, probe_residual(values[i], values[j], ctx.probes()));
      r.residual_compressed = std::max(r.residual_compressed, compressed_residual(values[i], values[j], ctx.probes()));
    }
  for (std::size_t i = 0; i < values.size(); ++i)
    r.convergence.push_back({times[i], probe_residual(values[i], values.front(), ctx.probes())});

  // ‖dG/ds‖ on the probes at interior samples, with the step counts of the sample point held fixed.
  Real max_derivative = 0.0;
  for (std::size_t i = 1; i + 1 < times.size(); ++i) {
    const Real s = times[i];
    const int outer = G.steps_for(sc.beta - s);
    const int inner = G.steps_for(s);
    const CMatrix d = (G.at(s + eps, outer, inner) - G.at(s - eps, outer, inner)) / (2.0 * eps);
    max_derivative = std::max(max_derivative, probe_residual(d, CMatrix::Zero(d.rows(), d.cols()), ctx.probes()));
  }
  r.details["max_dG_ds"] = max_derivative;
  r.details["eps"] = eps;
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Probe residual of d/ds e^{a*(e^{-sω}f)} (central difference) against -[H₀, e^{a*(e^{-sω}f)}].
inline Real derivative_relation_residual(const ScenarioContext& ctx, Real s, Real eps) {
  const auto& f = ctx.scenario().f;
  const CMatrix plus = ctx.exp_create(ctx.heat(f, s + eps));
  const CMatrix minus = ctx.exp_create(ctx.heat(f, s - eps));
  const CMatrix y = ctx.exp_create(ctx.heat(f, s));
  const CMatrix& h0 = ctx.table()->free_hamiltonian();
  const CMatrix derivative = (plus - minus) / (2.0 * eps);
  const CMatrix expected = -(h0 * y - y * h0);
  return probe_residual(derivative, expected, ctx.probes());
}

inline Real verify_derivative_relation(const Scenario& sc, Real s, Real eps) {
  if (s < 0.0 || s > sc.beta) throw std::invalid_argument("verify_derivative_relation: s outside [0, beta]");
  ScenarioContext ctx(sc);
  return derivative_relation_residual(ctx, s, eps);
}

/// Report form: residual at ε, with the ε-halving series as the convergence list.
inline VerificationReport verify_derivative_relation_report(const Scenario& sc, Real eps = 1e-4, int halvings = 3) {
  detail::Stopwatch clock;
  ScenarioContext ctx(sc);
  const Real s = sc.beta / 2.0;
  VerificationReport r;
  r.scenario_id = sc.id;
  r.identity = "derivative_relation";
  std::vector<std::vector<Real>> rows;
  Real e = eps;
  for (int i = 0; i <= halvings; ++i, e *= 0.5) rows.push_back({e, derivative_relation_residual(ctx, s, e)});
  r.residual_probe = rows.front()[1];
  const CMatrix plus = ctx.exp_create(ctx.heat(sc.f, s + eps));
  const CMatrix minus = ctx.exp_create(ctx.heat(sc.f, s - eps));
  const CMatrix y = ctx.exp_create(ctx.heat(sc.f, s));
  const CMatrix& h0 = ctx.table()->free_hamiltonian();
  r.residual_compressed = compressed_residual((plus - minus) / (2.0 * eps), -(h0 * y - y * h0), ctx.probes());
  std::sort(rows.begin(), rows.end());
  r.convergence = rows;
  r.details["s"] = s;
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Links of the adjoint / anti-time-ordering argument for the annihilation half.
///
/// link1_*: the adjoint of the creation-side identity taken with conj(g), conj(h) equals the
///          anti-time-ordered annihilation identity, side by side.
/// link2_*: anti-time-ordered exponentials equal time-ordered exponentials of the
///          reparametrized families s ↦ H(β - s).
struct AdjointChain {
  Real link1_lhs = 0.0;
  Real link1_rhs = 0.0;
  Real link2_lhs = 0.0;
  Real link2_rhs = 0.0;
  Real anti_ordered_identity = 0.0;
  Real reparametrized_identity = 0.0;
};

inline AdjointChain adjoint_chain(const ScenarioContext& ctx) {
  const auto& sc = ctx.scenario();
  const Real beta = sc.beta;
  const LatticeFunction g_bar = sc.g.conjugate();
  const LatticeFunction h_bar = sc.h.conjugate();

  // Creation-side identity with conj data: T[H(ḡ_s)] e^{a*(h̄)} = e^{a*(e^{-βω}h̄)} T[H(ḡ_s + h̄_s)].
  const auto fam_g_bar = ctx.family({ctx.forward(g_bar)});
  const auto fam_gh_bar = ctx.family({ctx.forward(g_bar), ctx.forward(h_bar)});
  const CMatrix other_lhs = ctx.t_exp(fam_g_bar) * ctx.exp_create(h_bar);
  const CMatrix other_rhs = ctx.exp_create(ctx.heat(h_bar, beta)) * ctx.t_exp(fam_gh_bar);

  // Anti-time-ordered annihilation identity: e^{a(h)} A[H(g_s)] = A[H(h_s + g_s)] e^{a(e^{-βω}h)}.
  const auto fam_g = fam_g_bar.conjugated();
  const auto fam_gh = fam_gh_bar.conjugated();
  EvolutionConfig anti = sc.evolution;
  anti.ordering = Ordering::AntiTimeOrdered;
  const CMatrix a_g = time_ordered_exp(fam_g, 0.0, beta, anti);
  const CMatrix a_gh = time_ordered_exp(fam_gh, 0.0, beta, anti);
  const CMatrix anti_lhs = ctx.exp_annihilate(sc.h) * a_g;
  const CMatrix anti_rhs = a_gh * ctx.exp_annihilate(ctx.heat(sc.h, beta));

  // Time-ordered exponentials of the reparametrized families.
  const auto rev_g = [&](Real s) { return fam_g.evaluate(beta - s); };
  const auto rev_gh = [&](Real s) { return fam_gh.evaluate(beta - s); };
  EvolutionConfig forward = sc.evolution;
  forward.ordering = Ordering::TimeOrdered;
  const CMatrix t_g = time_ordered_exp(rev_g, 0.0, beta, forward);
  const CMatrix t_gh = time_ordered_exp(rev_gh, 0.0, beta, forward);

  const auto& probes = ctx.probes();
  AdjointChain c;
  c.link1_lhs = probe_residual(CMatrix(other_lhs.adjoint()), anti_lhs, probes);
  c.link1_rhs = probe_residual(CMatrix(other_rhs.adjoint()), anti_rhs, probes);
  c.link2_lhs = probe_residual(a_g, t_g, probes);
  c.link2_rhs = probe_residual(a_gh, t_gh, probes);
  c.anti_ordered_identity = probe_residual(anti_lhs, anti_rhs, probes);
  c.reparametrized_identity = probe_residual(ctx.exp_annihilate(sc.h) * t_g,
                                             t_gh * ctx.exp_annihilate(ctx.heat(sc.h, beta)), probes);
  return c;
}

inline VerificationReport verify_adjoint_step(const Scenario& sc) {
  detail::Stopwatch clock;
  ScenarioContext ctx(sc);
  const AdjointChain c = adjoint_chain(ctx);
  VerificationReport r;
  r.scenario_id = sc.id;
  r.identity = "adjoint_step";
  r.residual_probe = std::max({c.link1_lhs, c.link1_rhs, c.link2_lhs, c.link2_rhs});
  r.residual_compressed = r.residual_probe;
  r.details["link1_lhs"] = c.link1_lhs;
  r.details["link1_rhs"] = c.link1_rhs;
  r.details["link2_lhs"] = c.link2_lhs;
  r.details["link2_rhs"] = c.link2_rhs;
  r.details["anti_ordered_identity"] = c.anti_ordered_identity;
  r.details["reparametrized_identity"] = c.reparametrized_identity;
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Runs one named identity with its default parameters.
inline VerificationReport run_identity(const std::string& name, const Scenario& sc) {
  if (name == "free_exchange") return verify_free_exchange(sc);
  if (name == "hi_commutator") return verify_hi_commutator(sc);
  if (name == "pull_through") return verify_pull_through(sc);
  if (name == "exchange") return verify_exchange(sc);
  if (name == "exchange_special") return verify_exchange_special(sc);
  if (name == "g_flatness") return verify_g_flatness(sc);
  if (name == "derivative_relation") return verify_derivative_relation_report(sc);
  if (name == "adjoint_step") return verify_adjoint_step(sc);
  throw std::invalid_argument("unknown identity: " + name);
}

enum class SweepAxis { Cutoff, Steps, Both };

struct SweepLevels {
  std::vector<int> n_max;  // used by Cutoff and Both
  std::vector<int> steps;  // used by Steps and Both
};

/// Residuals below this are treated as converged for monotonicity purposes.
inline constexpr Real kResidualFloor = 1e-13;

/// Non-increasing, strictly decreasing wherever the previous value is above the floor.
inline bool decreasing_series(const std::vector<Real>& values) {
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i - 1] <= kResidualFloor && values[i] <= kResidualFloor) continue;
    if (!(values[i] < values[i - 1])) return false;
  }
  return true;
}

/// Re-runs `identity` over increasing n_max and/or steps. Levels run concurrently; rows come
/// back in level order. details["monotone"] is 1 when every axis series decreases.
inline VerificationReport convergence_sweep(const Scenario& sc, const std::string& identity, SweepAxis axis,
                                            const SweepLevels& levels) {
  detail::Stopwatch clock;
  std::vector<std::pair<int, int>> grid;  // (n_max, steps)
  const auto need = [](const std::vector<int>& v, const char* what) {
    if (v.size() < 2) throw std::invalid_argument(std::string("convergence_sweep: need >= 2 ") + what + " levels");
    if (!std::is_sorted(v.begin(), v.end())) throw std::invalid_argument("convergence_sweep: levels must be ascending");
  };
  if (axis == SweepAxis::Cutoff) {
    need(levels.n_max, "n_max");
    for (int n : levels.n_max) grid.emplace_back(n, sc.evolution.steps);
  } else if (axis == SweepAxis::Steps) {
    need(levels.steps, "steps");
    for (int s : levels.steps) grid.emplace_back(sc.n_max, s);
  } else {
    need(levels.n_max, "n_max");
    need(levels.steps, "steps");
    for (int n : levels.n_max)
      for (int s : levels.steps) grid.emplace_back(n, s);
  }

  std::vector<std::future<VerificationReport>> jobs;
  for (const auto& [n, steps] : grid) {
    Scenario level = sc;
    level.n_max = n;
    level.evolution.steps = steps;
    jobs.push_back(std::async(std::launch::async, [level, identity] { return run_identity(identity, level); }));
  }
  std::vector<Real> residuals;
  for (auto& j : jobs) residuals.push_back(j.get().residual_probe);

  VerificationReport r;
  r.scenario_id = sc.id;
  r.identity = identity;
  bool monotone = true;
  if (axis == SweepAxis::Both) {
    const std::size_t ns = levels.steps.size();
    const std::size_t nn = levels.n_max.size();
    for (std::size_t i = 0; i < nn; ++i)
      for (std::size_t k = 0; k < ns; ++k)
        r.convergence.push_back({static_cast<Real>(levels.n_max[i]), static_cast<Real>(levels.steps[k]), residuals[i * ns + k]});
    // Decrease along the diagonal of the grid, where both parameters grow together.
    std::vector<Real> diag;
    for (std::size_t i = 0; i < std::min(nn, ns); ++i) diag.push_back(residuals[i * ns + i]);
    monotone = decreasing_series(diag);
  } else {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const Real param = axis == SweepAxis::Cutoff ? grid[i].first : grid[i].second;
      r.convergence.push_back({param, residuals[i]});
    }
    monotone = decreasing_series(residuals);
  }
  r.residual_probe = residuals.back();
  r.residual_compressed = residuals.back();
  r.details["monotone"] = monotone ? 1.0 : 0.0;
  r.wall_ms = clock.elapsed_ms();
  return r;
}

/// Integrator part of an identity residual: the probe residual between the difference
/// matrices (LHS - RHS) at each step count and at `reference_steps`. The truncation part of
/// the difference does not depend on the step count and cancels.
inline std::vector<std::vector<Real>> ode_error_components(const Scenario& sc, const std::string& identity,
                                                           const std::vector<int>& steps, int reference_steps) {
  const auto sides_for = [&](int n) {
    Scenario level = sc;
    level.evolution.steps = n;
    ScenarioContext ctx(level);
    IdentitySides s;
    if (identity == "exchange") s = exchange_sides(ctx);
    else if (identity == "pull_through") s = pull_through_sides(ctx);
    else if (identity == "exchange_special") s = exchange_special_sides(ctx);
    else throw std::invalid_argument("ode_error_components: unsupported identity " + identity);
    return std::pair<CMatrix, ProbeSet>(s.lhs - s.rhs, ctx.probes());
  };
  const auto [reference, probes] = sides_for(reference_steps);
  std::vector<std::vector<Real>> rows;
  for (int n : steps) {
    const auto [diff, unused] = sides_for(n);
    (void)unused;
    rows.push_back({static_cast<Real>(n), probe_residual(diff, reference, probes)});
  }
  return rows;
}

/// The generic interacting scenario: ξ⁴, one site, n_max 14, f = h = 0.15 u₁, g = 0,
/// β = 0.25, 400 RK4 steps, λ = 0.01.
inline Scenario generic_scenario() {
  Scenario sc;
  sc.id = "generic";
  sc.lattice = LatticeSpec{1, 1.0, 1.0};
  sc.n_max = 14;
  sc.poly = PolynomialSpec::monomial(4);
  sc.reset_functions(0.01);
  const Lattice lat(sc.lattice);
  sc.f = 0.15 * lat.mode(0).cast<Complex>();
  sc.h = sc.f;
  sc.beta = 0.25;
  sc.evolution = EvolutionConfig{400, Method::RK4, Ordering::TimeOrdered};
  sc.probe_cap = -1;
  return sc;
}

}  // namespace hkx
