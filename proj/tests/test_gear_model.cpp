#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "gears/errors.hpp"
#include "gears/gear_model.hpp"
#include "oracles.hpp"

using namespace gears;

namespace {

DerivedGeometry geometry(int n1, int n2, double V0 = 10.0, double I1 = 1.0, double I2 = 1.0) {
  return derive_geometry(GearConfig(n1, n2, I1, I2, V0));
}

// Scaled numerator of an exact mu, as the oracle stores it.
std::int64_t scaled(const Rational& mu, int n1, int n2) {
  const Rational s = mu * oracle::denom(n1, n2);
  REQUIRE(is_integer(s));
  return s.numerator();
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(GearConfig(0, 2, 1, 1, 1), ConfigError);
  CHECK_THROWS_AS(GearConfig(2, 2, 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(GearConfig(2, 2, 1, -1, 1), ConfigError);
  CHECK_THROWS_AS(GearConfig(2, 2, 1, 1, -1), ConfigError);
  CHECK_THROWS_AS(GearConfig(2, 2, 1, 1, NAN), ConfigError);
  CHECK_THROWS(PotentialSpec({{-1, 0.5}}));
  CHECK_THROWS(PotentialSpec({{1, 0.5}, {1, 0.2}}));
}

TEST_CASE("default potential") {
  const PotentialSpec u;
  CHECK(u.value(0.0) == doctest::Approx(1.0));
  CHECK(u.value(std::numbers::pi) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(u.derivative(0.3) == doctest::Approx(-0.5 * std::sin(0.3)));
  const auto ex = u.extrema();
  CHECK(std::abs(ex.x_max) < 1e-12);
  CHECK(ex.u_max == doctest::Approx(1.0));
  CHECK(ex.u_min == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("derived geometry of identical two-tooth gears") {
  const auto g = geometry(2, 2);
  CHECK(g.Ic == 2.0);
  CHECK(g.Ir == 2.0);
  CHECK(g.M1 == 1);
  CHECK(g.M2 == 1);
  CHECK(*g.nu_exact == Rational(1));
  CHECK(g.grid_spacing == Rational(2));
  CHECK(g.r_cl == 0.5);
  CHECK(g.tau_c == doctest::Approx(8 * std::numbers::pi).epsilon(1e-15));
  CHECK(g.omega0 == doctest::Approx(4 * std::sqrt(5.0)).epsilon(1e-15));
  CHECK(2 * std::numbers::pi / g.omega0 == doctest::Approx(0.70).epsilon(0.01 / 0.70));
}

TEST_CASE("derived geometry of free single-tooth gears") {
  const auto g = geometry(1, 1, 0.0);
  CHECK(g.Ic == 2.0);
  CHECK(g.Ir == 2.0);
  CHECK(*g.nu_exact == Rational(1));
  CHECK(g.r_cl == 0.5);
  CHECK(g.L_r_threshold == 0.0);
  CHECK(g.ell_threshold == 0.0);
}

TEST_CASE("derived geometry of (4,2) gears") {
  const auto g = geometry(4, 2);
  CHECK(g.M1 == 1);
  CHECK(g.M2 == 2);
  CHECK(g.g == 2);
  CHECK(*g.nu_exact == Rational(5, 3));
  CHECK(g.Ic == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(g.Ir == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(g.grid_spacing == Rational(3));
  CHECK(g.r_cl == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(g.ell_threshold == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(g.tau_c == doctest::Approx(20 * std::numbers::pi).epsilon(1e-15));
}

TEST_CASE("derived invariants over many teeth pairs") {
  for (int n1 = 1; n1 <= 9; ++n1) {
    for (int n2 = 1; n2 <= 9; ++n2) {
      const auto g = geometry(n1, n2, 3.0);
      CHECK(g.M1 * n1 == g.lcm);
      CHECK(g.M2 * n2 == g.lcm);
      CHECK(1 / *g.nu_exact == Rational(g.n * g.g, n1 * n1 + n2 * n2));
      CHECK(g.grid_spacing == Rational(g.M1 + g.M2));
      CHECK(g.r_cl > 0.0);
      CHECK(g.r_cl <= 0.5);
    }
  }
  // unequal inertia: general nu formula
  const auto g = geometry(3, 2, 1.0, 1.0, 2.5);
  CHECK(g.nu == doctest::Approx((4.0 * 1.0 + 9.0 * 2.5) / (5.0 * 1.75)));
  CHECK_FALSE(g.nu_exact.has_value());
}

TEST_CASE("collective momenta examples") {
  const auto g22 = geometry(2, 2);
  CHECK(momenta_to_collective(0, 0, g22) == CollectiveMomentum{0, 0});
  CHECK(momenta_to_collective(1, 0, g22) == CollectiveMomentum{1, 1});
  const auto g42 = geometry(4, 2);
  CHECK(momenta_to_collective(1, 1, g42) == CollectiveMomentum{Rational(9, 5), Rational(3, 5)});

  CHECK(collective_to_momenta({6, 2}, g22) == std::pair<std::int64_t, std::int64_t>{4, 2});
  CHECK_THROWS_AS(collective_to_momenta({1, 0}, g22), NonPhysical);
  CHECK(collective_to_momenta({0, 0}, g22) == std::pair<std::int64_t, std::int64_t>{0, 0});

  CHECK_THROWS_AS(momenta_to_collective(1, 1, geometry(2, 2, 10, 1, 2)), UnsupportedInertia);
}

TEST_CASE("collective momenta agree with the integer oracle and round-trip") {
  for (auto [n1, n2] : {std::pair{2, 2}, {4, 2}, {3, 5}, {1, 1}, {6, 4}}) {
    const auto g = geometry(n1, n2);
    for (int m1 = -100; m1 <= 100; ++m1) {
      for (int m2 = -100; m2 <= 100; ++m2) {
        const auto mu = momenta_to_collective(m1, m2, g);
        const auto expect = oracle::scaled_mu(n1, n2, m1, m2);
        if (scaled(mu.mu_c, n1, n2) != expect.c || scaled(mu.mu_r, n1, n2) != expect.r) FAIL("mismatch");
        if (collective_to_momenta(mu, g) != std::pair<std::int64_t, std::int64_t>{m1, m2}) FAIL("round trip");
      }
    }
  }
}

TEST_CASE("identical gears: mu_c = m1 + m2, mu_r = m1 - m2") {
  for (int n : {1, 2, 3, 7}) {
    const auto g = geometry(n, n);
    for (int m1 = -20; m1 <= 20; ++m1)
      for (int m2 = -20; m2 <= 20; ++m2) CHECK(momenta_to_collective(m1, m2, g) == CollectiveMomentum{m1 + m2, m1 - m2});
  }
}

TEST_CASE("nu consistency: (M1 m1 + M2 m2) / nu = mu_c") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> teeth(1, 12), m(-1000, 1000);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto g = geometry(teeth(rng), teeth(rng));
    const int m1 = m(rng), m2 = m(rng);
    CHECK((g.M1 * m1 + g.M2 * m2) / *g.nu_exact == momenta_to_collective(m1, m2, g).mu_c);
  }
}

TEST_CASE("allowed relative grid examples") {
  const auto g22 = geometry(2, 2);
  auto grid = allowed_relative_grid(0, g22);
  CHECK(grid.offset == Rational(0));
  CHECK(grid.spacing == Rational(2));
  grid = allowed_relative_grid(1, g22);
  CHECK(grid.offset == Rational(1));
  CHECK(grid.spacing == Rational(2));
  grid = allowed_relative_grid(0, geometry(4, 2));
  CHECK(grid.offset == Rational(0));
  CHECK(grid.spacing == Rational(3));

  CHECK_THROWS_AS(allowed_relative_grid(Rational(1, 2), g22), NonPhysical);
  CHECK_THROWS_AS(allowed_relative_grid(0, geometry(2, 2, 10, 1, 3)), UnsupportedInertia);
}

TEST_CASE("allowed relative grid equals the brute-force lattice") {
  constexpr int R = 50;
  for (auto [n1, n2] : {std::pair{2, 2}, {4, 2}, {3, 3}, {3, 5}, {1, 2}, {6, 4}}) {
    const auto g = geometry(n1, n2);
    const std::int64_t D = oracle::denom(n1, n2);
    // mu_c classes reachable from small (m1, m2)
    std::set<std::int64_t> classes;
    for (int m1 = -3; m1 <= 3; ++m1)
      for (int m2 = -3; m2 <= 3; ++m2) classes.insert(oracle::scaled_mu(n1, n2, m1, m2).c);
    for (std::int64_t c : classes) {
      const Rational mu_c(c, D);
      CHECK(is_physical_mu_c(mu_c, g));
      const auto expected = oracle::brute_relative_set(n1, n2, c, R);
      // Inside a window well within the brute-force range, both sets coincide.
      const Rational window(R / 2);
      const int J = static_cast<int>(floor_int(window / g.grid_spacing));
      const GridSpec grid = allowed_relative_grid(mu_c, g, J);
      std::set<std::int64_t> got;
      for (std::size_t i = 0; i < grid.size(); ++i) got.insert(scaled(grid.point(i), n1, n2));
      std::set<std::int64_t> trimmed;
      for (std::int64_t r : expected)
        if (Rational(r, D) >= -grid.cutoff() && Rational(r, D) <= grid.cutoff()) trimmed.insert(r);
      CHECK(got == trimmed);
      CHECK(grid.spacing == Rational(g.n, g.g));
    }
  }
}

TEST_CASE("grid window is symmetric and indexable") {
  const GridSpec a{0, 2, 5};
  CHECK(a.size() == 11);
  CHECK(a.point(0) == Rational(-10));
  CHECK(a.point(10) == Rational(10));
  CHECK(*a.index_of(4) == 7);
  CHECK_FALSE(a.index_of(3).has_value());
  CHECK_FALSE(a.index_of(12).has_value());
  const GridSpec b{1, 2, 5};
  CHECK(b.size() == 10);
  CHECK(b.point(0) == Rational(-9));
  CHECK(b.point(9) == Rational(9));
}

TEST_CASE("angular momentum split") {
  const auto g22 = geometry(2, 2);
  auto [L1, L2] = angular_momentum_split(6, 6, g22);
  CHECK(L1 == doctest::Approx(6));
  CHECK(L2 == doctest::Approx(0).epsilon(1e-15));
  std::tie(L1, L2) = angular_momentum_split(0, 0, g22);
  CHECK(L1 == 0.0);
  CHECK(L2 == 0.0);

  const auto g42 = geometry(4, 2);
  std::tie(L1, L2) = angular_momentum_split(9, 0, g42);
  CHECK(L1 == doctest::Approx(2.0 * 9 / 6));
  CHECK(L2 == doctest::Approx(4.0 * 9 / 6));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-50, 50), inertia(0.2, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto g = geometry(1 + trial % 5, 1 + trial % 3, 1.0, inertia(rng), inertia(rng));
    const double Lc = x(rng), Lr = x(rng);
    const auto [a, b] = angular_momentum_split(Lc, Lr, g);
    const auto [Lc2, Lr2] = collective_from_gear_momenta(a, b, g);
    CHECK(Lc2 == doctest::Approx(Lc).epsilon(1e-12));
    CHECK(Lr2 == doctest::Approx(Lr).epsilon(1e-12));
  }
}

TEST_CASE("real-valued collective map for unequal inertia matches the exact one when equal") {
  const auto g = geometry(4, 2);
  const auto [c, r] = momenta_to_collective_real(3, -2, g);
  const auto exact = momenta_to_collective(3, -2, g);
  CHECK(c == doctest::Approx(to_double(exact.mu_c)).epsilon(1e-14));
  CHECK(r == doctest::Approx(to_double(exact.mu_r)).epsilon(1e-14));
  // collective_from_gear_momenta applied to integer momenta is the same map
  const auto g2 = geometry(3, 2, 1.0, 1.0, 2.0);
  const auto [c2, r2] = momenta_to_collective_real(5, 7, g2);
  const auto [c3, r3] = collective_from_gear_momenta(5, 7, g2);
  CHECK(c2 == doctest::Approx(c3));
  CHECK(r2 == doctest::Approx(r3));
}

TEST_CASE("Bloch labels lie in (-n/2, n/2]") {
  const auto g = geometry(3, 3);
  CHECK(bloch_label(3, g) == Rational(3));
  CHECK(bloch_label(-3, g) == Rational(3));
  CHECK(bloch_label(4, g) == Rational(-2));
  CHECK(bloch_label(13, g) == Rational(1));
}
