#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace hkx;
using Catch::Matchers::WithinAbs;

TEST_CASE("single-site omega is the mass") {
  const RMatrix w = omega_matrix(LatticeSpec{1, 1.0, 1.0});
  REQUIRE(w.rows() == 1);
  CHECK_THAT(w(0, 0), WithinAbs(1.0, 1e-15));
}

TEST_CASE("two-site omega eigenpairs") {
  // Stencil: -Δ + m² = [[3, -2], [-2, 3]] with eigenvectors (1,1)/√2 -> 1 and (1,-1)/√2 -> 5.
  const RMatrix w = omega_matrix(LatticeSpec{2, 1.0, 1.0});
  RVector even(2), odd(2);
  even << 1.0, 1.0;
  odd << 1.0, -1.0;
  even.normalize();
  odd.normalize();
  CHECK((w * even - 1.0 * even).norm() < 1e-14);
  CHECK((w * odd - std::sqrt(5.0) * odd).norm() < 1e-14);
}

TEST_CASE("omega squared reproduces the shifted Laplacian") {
  for (int sites = 1; sites <= 8; ++sites)
    for (Real dx : {0.5, 1.0, 1.7})
      for (Real m : {0.3, 1.0, 2.5}) {
        const LatticeSpec spec{sites, dx, m};
        const Lattice lat(spec);
        const RMatrix w = lat.omega();
        CHECK((w * w - shifted_laplacian(spec)).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, shifted_laplacian(spec).norm()));
        CHECK((w - w.transpose()).cwiseAbs().maxCoeff() < 1e-13);
        CHECK(lat.frequencies().minCoeff() >= m - 1e-12);
      }
}

TEST_CASE("mode functions are orthonormal under the lattice measure") {
  const Lattice lat(LatticeSpec{5, 0.4, 1.2});
  for (int k = 0; k < 5; ++k)
    for (int l = 0; l < 5; ++l) {
      const Real ip = 0.4 * lat.mode(k).dot(lat.mode(l));
      CHECK_THAT(ip, WithinAbs(k == l ? 1.0 : 0.0, 1e-13));
    }
}

TEST_CASE("pair is the bilinear lattice integral") {
  const LatticeSpec spec{2, 0.5, 1.0};
  LatticeFunction h(2), f(2);
  h << 1.0, 2.0;
  f << 3.0, 4.0;
  CHECK(std::abs(pair(spec, h, f) - Complex(5.5)) < 1e-15);
  CHECK(std::abs(pair(spec, LatticeFunction::Zero(2), f)) == 0.0);

  std::mt19937_64 rng(7);
  const LatticeSpec big{6, 0.7, 1.0};
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = testing::random_function(rng, 6);
    const auto b = testing::random_function(rng, 6);
    const auto c = testing::random_function(rng, 6);
    const Complex z(0.3, -1.1);
    CHECK(std::abs(pair(big, a, b) - pair(big, b, a)) <= 1e-14);
    // Linear, not conjugate-linear, in the first slot.
    CHECK(std::abs(pair(big, z * a + c, b) - (z * pair(big, a, b) + pair(big, c, b))) <= 1e-13);
  }
  CHECK_THROWS_AS(pair(big, LatticeFunction::Zero(5), LatticeFunction::Zero(6)), std::invalid_argument);
}

TEST_CASE("dirac reproduces point values") {
  const LatticeSpec spec{3, 0.5, 1.0};
  const LatticeFunction d = dirac(spec, 1);
  CHECK(d(0) == Complex(0.0));
  CHECK(d(1) == Complex(2.0));
  CHECK(d(2) == Complex(0.0));

  std::mt19937_64 rng(11);
  const auto f = testing::random_function(rng, 3);
  for (int x = 0; x < 3; ++x) {
    CHECK(std::abs(pair(spec, dirac(spec, x), f) - f(x)) < 1e-15);
    for (int y = 0; y < 3; ++y)
      CHECK(std::abs(pair(spec, dirac(spec, x), dirac(spec, y)) - Complex(x == y ? 2.0 : 0.0)) < 1e-15);
  }
  CHECK_THROWS_AS(dirac(spec, 3), std::out_of_range);
  CHECK_THROWS_AS(dirac(spec, -1), std::out_of_range);
}

TEST_CASE("heat-flow profiles") {
  const Lattice lat(LatticeSpec{1, 1.0, 2.0});
  const LatticeFunction v = LatticeFunction::Ones(1);

  const ProfileTerm fwd{v, Direction::Forward, 1.0};
  CHECK(std::abs(profile_at(fwd, 0.5, lat)(0) - Complex(0.5 * std::exp(-1.0))) < 1e-15);
  CHECK_THAT(0.5 * std::exp(-1.0), WithinAbs(0.1839397, 1e-7));

  // f_0 = (2ω)^{-1/2} f differs from f.
  const Complex f0 = profile_at(fwd, 0.0, lat)(0);
  CHECK(std::abs(f0 - Complex(0.5)) < 1e-15);
  CHECK(std::abs(f0 - v(0)) > 0.4);

  const ProfileTerm bwd{v, Direction::Backward, 0.8};
  CHECK((profile_at(bwd, 0.8, lat) - profile_at(fwd, 0.0, lat)).norm() < 1e-15);
  CHECK((profile_at(bwd, 0.3, lat) - profile_at(fwd, 0.5, lat)).norm() < 1e-15);
  CHECK_THROWS_AS(profile_at(bwd, 0.81, lat), std::out_of_range);
  CHECK_THROWS_AS(profile_at(bwd, -0.01, lat), std::out_of_range);
  CHECK_THROWS_AS(profile_at(ProfileTerm{v, Direction::Backward, 0.0}, 0.0, lat), std::invalid_argument);
}

TEST_CASE("heat flow is a semigroup") {
  std::mt19937_64 rng(3);
  const Lattice lat(LatticeSpec{6, 0.5, 0.8});
  for (int trial = 0; trial < 10; ++trial) {
    const auto v = testing::random_function(rng, 6);
    const Real s1 = 0.1 * (trial + 1), s2 = 0.37;
    const auto two_step = lat.heat_flow(lat.heat_flow(v, s1), s2);
    CHECK((two_step - lat.heat_flow(v, s1 + s2)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("invalid lattice specs are rejected") {
  CHECK_THROWS_AS(Lattice(LatticeSpec{0, 1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(LatticeSpec{2, 0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(LatticeSpec{2, 1.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(Lattice(LatticeSpec{2, 1.0, -1.0}), std::invalid_argument);
  const Lattice lat(LatticeSpec{2, 1.0, 1.0});
  CHECK_THROWS_AS(lat.heat_flow(LatticeFunction::Zero(3), 0.1), std::invalid_argument);
}
