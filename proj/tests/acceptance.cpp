// Acceptance suite: one PASS/FAIL line per criterion A1-A9.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hkx/suite.hpp"

using namespace hkx;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  Detail& add(const char* fmt, double v) {
    char buf[128];
    std::snprintf(buf, sizeof buf, fmt, v);
    if (!text_.empty()) text_ += ", ";
    text_ += buf;
    return *this;
  }
  std::string str() const { return text_; }

 private:
  std::string text_;
};

LatticeFunction random_function(std::mt19937_64& rng, int sites, Real scale = 1.0) {
  std::uniform_real_distribution<Real> u(-1.0, 1.0);
  LatticeFunction v(sites);
  for (int i = 0; i < sites; ++i) v(i) = Complex(scale * u(rng), scale * u(rng));
  return v;
}

RingElement random_element(std::mt19937_64& rng, int sites, int cap) {
  RingElement e(sites, cap);
  for (int j = 0; j <= cap; ++j) e[j] = random_function(rng, sites);
  return e;
}

Outcome a1_ccr() {
  std::mt19937_64 rng(1);
  Real worst = 0.0;
  for (int sites = 1; sites <= 3; ++sites)
    for (int n = 1; n <= 10; ++n) {
      const auto space = make_fock_space(make_lattice(LatticeSpec{sites, 1.0, 1.0}), n);
      for (int trial = 0; trial < 2; ++trial)
        worst = std::max(worst, ccr_defect(*space, random_function(rng, sites), random_function(rng, sites)));
    }
  return {worst <= 1e-12, Detail().add("max defect %.2e (tol 1e-12)", worst).str()};
}

Outcome a2_ring() {
  std::mt19937_64 rng(2);
  Real worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int cap = 1 + trial % 6;
    const int sites = 1 + trial % 3;
    const auto f = random_function(rng, sites);
    const auto g = random_function(rng, sites);
    const auto u = random_element(rng, sites, cap);
    const auto v = random_element(rng, sites, cap);
    const auto w = random_element(rng, sites, cap);
    const auto id = RingElement::identity(sites, cap);
    worst = std::max({worst, star(gamma(f, cap), gamma(g, cap)).max_abs_difference(gamma(f + g, cap)),
                      star(gamma(f, cap), gamma(-f, cap)).max_abs_difference(id),
                      star(u, id).max_abs_difference(u), star(id, u).max_abs_difference(u),
                      star(u, v).max_abs_difference(star(v, u)),
                      star(star(u, v), w).max_abs_difference(star(u, star(v, w)))});
  }
  return {worst <= 1e-13, Detail().add("max componentwise deviation %.2e over 100 instances (tol 1e-13)", worst).str()};
}

Outcome a3_wick() {
  Real worst = 0.0, worst_vac = 0.0;
  for (int sites = 1; sites <= 2; ++sites)
    for (int n_max : {8, 12}) {
      const auto space = make_fock_space(make_lattice(LatticeSpec{sites, 1.0, 1.0}), n_max);
      const CVector vac = space->vacuum();
      for (int x = 0; x < sites; ++x)
        for (int n = 0; n <= 8; ++n) {
          const CMatrix b = wick_power(*space, x, n);
          const CMatrix r = wick_power_recursive(*space, x, n);
          // The recursion multiplies truncated matrices, so it is exact only n levels below the cutoff.
          if (n <= n_max) {
            const auto idx = space->indices_upto(n_max - n);
            worst = std::max(worst, CMatrix((b - r)(idx, idx)).cwiseAbs().maxCoeff());
          }
          if (n >= 1) worst_vac = std::max({worst_vac, std::abs(vac.dot(b * vac)), std::abs(vac.dot(r * vac))});
        }
    }
  const bool ok = worst <= 1e-11 && worst_vac <= 1e-12;
  return {ok, Detail()
                  .add("recursion vs binomial %.2e (tol 1e-11)", worst)
                  .add("vacuum expectation %.2e (tol 1e-12)", worst_vac)
                  .str()};
}

Scenario free_a4(int n_max) {
  Scenario sc;
  sc.id = "A4";
  sc.lattice = LatticeSpec{1, 1.0, 1.0};
  sc.n_max = n_max;
  sc.poly = PolynomialSpec::monomial(2);  // not used by the free identity
  sc.reset_functions(0.0);
  sc.f = 0.2 * Lattice(sc.lattice).mode(0).cast<Complex>();
  sc.h = sc.f;
  sc.beta = 0.5;
  sc.probe_cap = 4;
  return sc;
}

Outcome a4_free_exchange() {
  const auto r = convergence_sweep(free_a4(16), "free_exchange", SweepAxis::Cutoff, {{8, 12, 16}, {}});
  const bool decreasing = r.details.at("monotone") == 1.0 && r.convergence[0][1] > r.convergence[1][1] &&
                          r.convergence[1][1] > r.convergence[2][1];
  const Real final_residual = r.convergence.back()[1];
  return {final_residual <= 1e-8 && decreasing, Detail()
                                                    .add("n_max 8: %.2e", r.convergence[0][1])
                                                    .add("12: %.2e", r.convergence[1][1])
                                                    .add("16: %.2e (tol 1e-8, strictly decreasing)", final_residual)
                                                    .str()};
}

Outcome a5_hi_commutator() {
  Real worst = 0.0;
  std::mt19937_64 rng(5);
  for (int degree : {2, 4}) {
    Scenario sc = generic_scenario();
    sc.poly = PolynomialSpec::monomial(degree);
    sc.g = LatticeFunction::Constant(1, 0.1);
    const auto r = verify_hi_commutator(sc);
    if (sc.n_max - sc.effective_probe_cap() < degree + 2) return {false, "guard band violated"};
    worst = std::max({worst, r.details.at("creation_residual"), r.details.at("annihilation_residual")});

    Scenario two = sc;
    two.lattice = LatticeSpec{2, 1.0, 1.0};
    two.n_max = 16;
    two.probe_cap = 3;
    two.reset_functions(0.5);
    two.f = random_function(rng, 2, 0.2);
    two.h = random_function(rng, 2, 0.2);
    two.g = random_function(rng, 2, 0.2);
    const auto r2 = verify_hi_commutator(two, 0.05, 0.2);
    worst = std::max({worst, r2.details.at("creation_residual"), r2.details.at("annihilation_residual")});
  }
  return {worst <= 1e-10, Detail().add("max residual over xi^2, xi^4, both forms %.2e (tol 1e-10)", worst).str()};
}

Outcome a6_exchange() {
  const Scenario sc = generic_scenario();
  const Real ex = verify_exchange(sc).residual_probe;
  const Real special = verify_exchange_special(sc).residual_probe;

  // Integrator component: step halving until the truncation floor.
  bool ratios_ok = true;
  Detail d;
  d.add("exchange %.2e", ex).add("special %.2e (tol 1e-5)", special);
  for (const std::string id : {"exchange", "exchange_special"}) {
    const auto rows = ode_error_components(sc, id, {16, 32, 64, 128}, 6400);
    Real lo = 1e300, hi = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i][1] <= kResidualFloor) break;
      const Real ratio = rows[i - 1][1] / rows[i][1];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    ratios_ok = ratios_ok && lo >= 10.0 && hi <= 20.0;
    d.add((id + " halving ratios [%.1f").c_str(), lo).add("%.1f]", hi);
  }

  Scenario f0 = sc;
  f0.f.setZero();
  const Real reduction = std::abs(verify_exchange(f0).residual_probe - verify_pull_through(f0).residual_probe);
  d.add("f=0 vs pull-through %.1e (tol 1e-12)", reduction);
  return {ex <= 1e-5 && special <= 1e-5 && ratios_ok && reduction <= 1e-12, d.str()};
}

HamiltonianFamily a7_family(Real beta) {
  const auto space = make_fock_space(make_lattice(LatticeSpec{1, 1.0, 1.0}), 6);
  const auto table = make_wick_table(space, 4);
  return HamiltonianFamily(table, PolynomialSpec::monomial(4), LatticeFunction::Constant(1, 0.1),
                           {ProfileTerm{LatticeFunction::Constant(1, 0.3), Direction::Forward, beta}}, beta);
}

Outcome a7_time_ordered() {
  Detail d;
  const Scenario sc = generic_scenario();
  const ScenarioContext ctx(sc);
  const HamiltonianFamily constant = ctx.family({});
  EvolutionConfig cfg;
  cfg.steps = 200;
  const CMatrix t = time_ordered_exp(constant, 0.0, sc.beta, cfg);
  const CMatrix e = semigroup(constant(0.0), sc.beta);
  const Real const_err = operator_norm(t - e) / operator_norm(e);
  d.add("constant family %.2e (tol 1e-9)", const_err);

  const auto dyson_error = [](Real beta) {
    const auto fam = a7_family(beta);
    EvolutionConfig c;
    c.steps = 400;
    return operator_norm(dyson_partial(fam, 0.0, beta, 3, 6) - time_ordered_exp(fam, 0.0, beta, c));
  };
  const Real dyson_ratio = dyson_error(0.05) / dyson_error(0.025);
  d.add("Dyson order-3 beta-halving ratio %.2f [12, 20]", dyson_ratio);

  const auto fam = a7_family(0.4);
  const Real r1 = right_ode_residual(fam, 0.1, 0.3, cfg, 1e-3), r2 = right_ode_residual(fam, 0.1, 0.3, cfg, 5e-4);
  const Real l1 = left_ode_residual(fam, 0.1, 0.3, cfg, 1e-3), l2 = left_ode_residual(fam, 0.1, 0.3, cfg, 5e-4);
  d.add("right ODE eps-halving ratio %.2f", r1 / r2).add("left %.2f [3, 5]", l1 / l2);
  const bool ok = const_err <= 1e-9 && dyson_ratio >= 12.0 && dyson_ratio <= 20.0 && r1 / r2 >= 3.0 &&
                  r1 / r2 <= 5.0 && l1 / l2 >= 3.0 && l1 / l2 <= 5.0 && r1 <= 1e-4 && l1 <= 1e-4;
  return {ok, d.str()};
}

Outcome a8_proof_mechanics() {
  Detail d;
  const Scenario sc = generic_scenario();
  const Real flat = verify_g_flatness(sc).residual_probe;
  d.add("G deviation %.2e (tol 1e-6)", flat);

  const Real e1 = verify_derivative_relation(sc, sc.beta / 2.0, 1e-3);
  const Real e2 = verify_derivative_relation(sc, sc.beta / 2.0, 5e-4);
  d.add("derivative eps-halving ratio %.2f [3.5, 4.5]", e1 / e2);

  Scenario cplx = sc;
  cplx.h = LatticeFunction::Constant(1, Complex(0.1, 0.12));
  cplx.g = LatticeFunction::Constant(1, Complex(0.05, -0.03));
  const Real adj = std::max(verify_adjoint_step(sc).residual_probe, verify_adjoint_step(cplx).residual_probe);
  d.add("adjoint chain links %.2e (tol 1e-8)", adj);
  return {flat <= 1e-6 && e1 / e2 >= 3.5 && e1 / e2 <= 4.5 && adj <= 1e-8, d.str()};
}

Outcome a9_determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "hkx_acceptance_a9";
  fs::remove_all(root);
  RunConfig cfg = parse_config(demo_config_text());
  std::ostringstream sink;
  int identical = 0, total = 0;
  cfg.output = (root / "a").string();
  run_suite(cfg, sink);
  cfg.output = (root / "b").string();
  run_suite(cfg, sink);
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++total;
    std::ifstream x(entry.path(), std::ios::binary), y(root / "b" / entry.path().filename(), std::ios::binary);
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    if (sx.str() == sy.str() && !sx.str().empty()) ++identical;
  }
  fs::remove_all(root);
  return {total == 8 && identical == total,
          std::to_string(identical) + "/" + std::to_string(total) + " JSON reports byte-identical"};
}

struct Criterion {
  const char* id;
  const char* name;
  double limit_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"A1", "CCR exactness", 1.0, a1_ccr},
      {"A2", "ring laws", 1.0, a2_ring},
      {"A3", "Wick consistency", 5.0, a3_wick},
      {"A4", "free exchange", 5.0, a4_free_exchange},
      {"A5", "commutator lemma", 10.0, a5_hi_commutator},
      {"A6", "exchange theorem", 60.0, a6_exchange},
      {"A7", "time-ordered exponential", 30.0, a7_time_ordered},
      {"A8", "proof mechanics", 60.0, a8_proof_mechanics},
      {"A9", "determinism", 60.0, a9_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s %s  %-26s %s; %.2f s (limit %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL", c.name, o.detail.c_str(),
                secs, c.limit_s, in_time ? "" : " [too slow]");
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
