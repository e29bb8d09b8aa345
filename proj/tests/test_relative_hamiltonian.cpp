#include <algorithm>
#include <cmath>
#include <thread>

#include "doctest.h"
#include "gears/errors.hpp"
#include "gears/relative_hamiltonian.hpp"
#include "oracles.hpp"

using namespace gears;

namespace {

DerivedGeometry geometry(int n1, int n2, double V0) { return derive_geometry(GearConfig(n1, n2, 1.0, 1.0, V0)); }

}  // namespace

TEST_CASE("free rotor Hamiltonian is diagonal") {
  const auto g = geometry(2, 2, 0.0);
  const auto H = build_hamiltonian(allowed_relative_grid(0, g), g);
  CHECK(H.bands.empty());
  for (std::size_t i = 0; i < H.grid.size(); ++i) {
    const double mu = to_double(H.grid.point(i));
    CHECK(H.diagonal[static_cast<Eigen::Index>(i)] == mu * mu / 4.0);
  }
}

TEST_CASE("(2,2), V0=10 matrix elements") {
  const auto g = geometry(2, 2, 10.0);
  const auto H = build_hamiltonian(allowed_relative_grid(0, g), g);
  REQUIRE(H.bands.size() == 1);
  CHECK(H.bands[0].steps == 2);  // delta mu_r = 4
  CHECK(H.bands[0].coupling == -2.5);
  const auto i = static_cast<Eigen::Index>(*H.grid.index_of(6));
  CHECK(H.diagonal[i] == doctest::Approx(-5.0 + 36.0 / 4.0));
  CHECK(H.bandwidth() == 2);
}

TEST_CASE("(3,3), V0=20 bandwidth is three steps") {
  const auto g = geometry(3, 3, 20.0);
  const auto H = build_hamiltonian(allowed_relative_grid(0, g), g);
  CHECK(H.grid.spacing == Rational(2));
  CHECK(H.bandwidth() == 3);
}

TEST_CASE("build_hamiltonian rejects unequal inertia and tiny windows") {
  const auto g = derive_geometry(GearConfig(2, 2, 1.0, 2.0, 10.0));
  CHECK_THROWS_AS(build_hamiltonian(GridSpec{0, 2, 32}, g), UnsupportedInertia);
  const auto g2 = geometry(2, 2, 10.0);
  CHECK_THROWS(build_hamiltonian(GridSpec{0, 2, 3}, g2));
}

TEST_CASE("banded apply matches the dense matrix") {
  const auto g = derive_geometry(GearConfig(3, 2, 1, 1, 7.0, PotentialSpec({{0, 0.3}, {1, 0.5}, {2, 0.2}})));
  const auto H = build_hamiltonian(allowed_relative_grid(0, g, 40), g);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(H.size(), -1.0, 2.0);
  CHECK((H.apply(x) - H.dense() * x).norm() < 1e-14 * (H.dense() * x).norm());
  CHECK((H.dense() - H.dense().transpose()).norm() == 0.0);
}

TEST_CASE("1x1 eigendecomposition") {
  BandedHamiltonian H;
  H.grid = GridSpec{0, 2, 0};
  H.period = 4;
  H.momenta = {0};
  H.diagonal = Eigen::VectorXd::Constant(1, 3.5);
  const auto es = eigendecompose(H);
  CHECK(es.energies[0] == 3.5);
  CHECK(es.vectors(0, 0) == 1.0);
}

TEST_CASE("eigensystem is orthonormal with small residuals") {
  for (auto [n1, n2, V0] : {std::tuple{2, 2, 10.0}, {4, 2, 10.0}, {3, 3, 20.0}, {3, 5, 40.0}}) {
    const auto g = geometry(n1, n2, V0);
    const auto H = build_hamiltonian(allowed_relative_grid(0, g, 48), g);
    const auto es = eigendecompose(H);
    const Eigen::MatrixXd gram = es.vectors.transpose() * es.vectors;
    CHECK((gram - Eigen::MatrixXd::Identity(H.size(), H.size())).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd D = H.dense();
    for (Eigen::Index c = 0; c < es.size(); ++c) {
      const double res = (D * es.vectors.col(c) - es.energies[c] * es.vectors.col(c)).norm();
      CHECK(res < 1e-9 * (std::abs(es.energies[c]) + V0 + 1));
    }
    CHECK(std::is_sorted(es.energies.data(), es.energies.data() + es.size()));
  }
}

TEST_CASE("sector decoupling: different Bloch labels never couple") {
  const auto g = geometry(4, 2, 10.0);
  const auto H = build_hamiltonian(allowed_relative_grid(0, g, 40), g);
  const auto es = eigendecompose(H);
  const Eigen::MatrixXd M = es.vectors.transpose() * H.dense() * es.vectors;
  for (Eigen::Index i = 0; i < es.size(); ++i)
    for (Eigen::Index j = 0; j < es.size(); ++j)
      if (es.bloch_k[static_cast<std::size_t>(i)] != es.bloch_k[static_cast<std::size_t>(j)]) CHECK(std::abs(M(i, j)) < 1e-12);
}

TEST_CASE("lowest state of (2,2), V0=10 lies between well bottom and well mean") {
  const auto g = geometry(2, 2, 10.0);
  const auto es = eigendecompose(build_hamiltonian(allowed_relative_grid(0, g), g));
  CHECK(es.energies[0] < -5.0);
  CHECK(es.energies[0] > -10.0);
  // harmonic estimate -V0 + (n/2) sqrt(V0 / 2 Ir) within 10 %
  const double harmonic = -10.0 + 2.0 * std::sqrt(10.0 / 4.0);
  CHECK(std::abs(es.energies[0] / harmonic - 1.0) < 0.1);
}

TEST_CASE("relative spectrum matches a dense two-rotor sector diagonalization") {
  // mu_c = 0 sector: n2 m1 + n1 m2 = 0
  for (auto [n1, n2, V0] : {std::tuple{2, 2, 10.0}, {4, 2, 10.0}, {3, 3, 20.0}}) {
    const auto g = geometry(n1, n2, V0);
    const auto es = eigendecompose(build_hamiltonian(allowed_relative_grid(0, g, 64), g));
    const auto sector = oracle::two_rotor_sector(n1, n2, V0, 0, 60);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sector.H, Eigen::EigenvaluesOnly);
    for (int j = 0; j < 12; ++j) CHECK(es.energies[j] == doctest::Approx(solver.eigenvalues()[j]).epsilon(1e-10));
  }
}

TEST_CASE("Brillouin zones") {
  const auto ks = brillouin_zone(geometry(3, 3, 20.0));
  REQUIRE(ks.size() == 6);
  CHECK(ks.front() == Rational(-2));
  CHECK(ks.back() == Rational(3));
  const auto ks42 = brillouin_zone(geometry(4, 2, 10.0));  // step 3/5 in (-3, 3]
  CHECK(ks42.size() == 10);
  CHECK(ks42.front() == Rational(-12, 5));
  CHECK(ks42.back() == Rational(3));
}

TEST_CASE("band structure of (3,3), V0=20") {
  const auto g = geometry(3, 3, 20.0);
  const auto bs = band_structure(g, 3);
  CHECK(bs.wave_numbers().size() == 6);
  for (int j = 1; j <= 3; ++j) CHECK(bs.band(j).size() == 6);
  for (double E : bs.band(1)) CHECK(E < 0);
  for (double E : bs.band(2)) CHECK(E < 0);
  for (double E : bs.band(3)) CHECK(E > 0);
  for (const auto& a : bs.entries)
    for (const auto& b : bs.entries)
      if (a.band == b.band && b.k == centered_residue(-a.k, Rational(6))) CHECK(std::abs(a.energy - b.energy) < 1e-10);
  // every band holds n = 6 states across the zone, and bands do not overlap
  const auto b1 = bs.band(1), b2 = bs.band(2);
  CHECK(*std::max_element(b1.begin(), b1.end()) < *std::min_element(b2.begin(), b2.end()));
}

TEST_CASE("free bands fold the parabola") {
  const auto g = geometry(2, 2, 0.0);
  const auto bs = band_structure(g, 2);
  for (const auto& e : bs.entries) {
    if (e.band != 1) continue;
    const double k = to_double(e.k);
    CHECK(e.energy == doctest::Approx(k * k / (2 * g.Ir)));
  }
}

TEST_CASE("band energies are converged in the truncation") {
  const auto g = geometry(2, 2, 40.0);
  const auto a = band_structure(g, 4, 32);
  const auto b = band_structure(g, 4, 64);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t i = 0; i < a.entries.size(); ++i) CHECK(std::abs(a.entries[i].energy - b.entries[i].energy) < 1e-10);
}

TEST_CASE("full zone grid contains every Bloch sector") {
  const auto g = geometry(4, 2, 10.0);
  const GridSpec grid = full_zone_grid(g, Rational(20));
  CHECK(grid.spacing == Rational(3, 5));
  CHECK(grid.cutoff() >= Rational(20));
  const auto es = eigendecompose(build_hamiltonian(grid, g));
  std::set<Rational> seen(es.bloch_k.begin(), es.bloch_k.end());
  CHECK(seen.size() == 10);
}

TEST_CASE("tail probability") {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(20);
  v[10] = 1.0;
  CHECK(tail_probability(v) == 0.0);
  v[0] = 0.5;
  CHECK(tail_probability(v) == doctest::Approx(0.25));
}

TEST_CASE("eigensystem cache returns shared entries under concurrent access") {
  EigenSystemCache cache;
  const auto g = geometry(2, 2, 10.0);
  const GridSpec grid = allowed_relative_grid(0, g);
  std::vector<std::shared_ptr<const EigenSystem>> got(8);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < got.size(); ++i) pool.emplace_back([&, i] { got[i] = cache.get(grid, g); });
  }
  CHECK(cache.size() == 1);
  for (const auto& es : got) CHECK(es->energies == got[0]->energies);
  CHECK(cache.get(grid, geometry(2, 2, 11.0)) != got[0]);
  CHECK(cache.size() == 2);
}
