#include "gears/gear_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "gears/errors.hpp"

namespace gears {

namespace {

struct Bezout {
  std::int64_t g, x, y;  // a x + b y = g
};

Bezout extended_gcd(std::int64_t a, std::int64_t b) {
  std::int64_t old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const auto q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  return {old_r, old_s, old_t};
}

void require_equal_inertia(const DerivedGeometry& geom, const char* what) {
  if (!geom.equal_inertia())
    throw UnsupportedInertia(std::string(what) + " requires I1 == I2");
}

// n1^2 + n2^2
std::int64_t teeth_norm(const DerivedGeometry& geom) {
  const std::int64_t n1 = geom.n1(), n2 = geom.n2();
  return n1 * n1 + n2 * n2;
}

}  // namespace

// ---------------------------------------------------------------------------
// PotentialSpec

PotentialSpec::PotentialSpec() : harmonics_{{0, 0.5}, {1, 0.5}} {}

PotentialSpec::PotentialSpec(std::vector<Harmonic> harmonics) : harmonics_(std::move(harmonics)) {
  std::set<int> seen;
  for (const auto& h : harmonics_) {
    if (h.p < 0) throw ConfigError("potential harmonic order must be non-negative");
    if (!std::isfinite(h.a)) throw ConfigError("potential coefficient must be finite");
    if (!seen.insert(h.p).second) throw ConfigError("duplicate potential harmonic " + std::to_string(h.p));
  }
  std::sort(harmonics_.begin(), harmonics_.end(), [](const Harmonic& a, const Harmonic& b) { return a.p < b.p; });
}

double PotentialSpec::constant() const {
  for (const auto& h : harmonics_)
    if (h.p == 0) return h.a;
  return 0.0;
}

int PotentialSpec::max_harmonic() const {
  int p = 0;
  for (const auto& h : harmonics_)
    if (h.a != 0.0) p = std::max(p, h.p);
  return p;
}

double PotentialSpec::value(double x) const {
  double u = 0.0;
  for (const auto& h : harmonics_) u += h.a * std::cos(h.p * x);
  return u;
}

double PotentialSpec::derivative(double x) const {
  double du = 0.0;
  for (const auto& h : harmonics_) du -= h.p * h.a * std::sin(h.p * x);
  return du;
}

double PotentialSpec::second_derivative(double x) const {
  double d2u = 0.0;
  for (const auto& h : harmonics_) d2u -= h.p * h.p * h.a * std::cos(h.p * x);
  return d2u;
}

double PotentialSpec::curvature_bound() const {
  double bound = 0.0;
  for (const auto& h : harmonics_) bound += h.p * h.p * std::abs(h.a);
  return bound;
}

PotentialSpec::Extrema PotentialSpec::extrema() const {
  constexpr int samples = 4096;
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Extrema e{0.0, value(0.0), 0.0, value(0.0)};
  for (int i = 1; i < samples; ++i) {
    const double x = two_pi * i / samples;
    const double u = value(x);
    if (u > e.u_max) e.u_max = u, e.x_max = x;
    if (u < e.u_min) e.u_min = u, e.x_min = x;
  }
  // Newton polish on u' = 0.
  auto polish = [this](double x) {
    for (int it = 0; it < 20; ++it) {
      const double d2 = second_derivative(x);
      if (d2 == 0.0) break;
      const double step = derivative(x) / d2;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    return x;
  };
  if (const double x = polish(e.x_max); value(x) > e.u_max) e.x_max = x, e.u_max = value(x);
  if (const double x = polish(e.x_min); value(x) < e.u_min) e.x_min = x, e.u_min = value(x);
  return e;
}

bool PotentialSpec::operator==(const PotentialSpec& other) const {
  return std::equal(harmonics_.begin(), harmonics_.end(), other.harmonics_.begin(), other.harmonics_.end(),
                    [](const Harmonic& a, const Harmonic& b) { return a.p == b.p && a.a == b.a; });
}

// ---------------------------------------------------------------------------
// GearConfig / DerivedGeometry

GearConfig::GearConfig(int n1, int n2, double I1, double I2, double V0, PotentialSpec potential)
    : n1_(n1), n2_(n2), I1_(I1), I2_(I2), V0_(V0), potential_(std::move(potential)) {
  if (n1 < 1 || n2 < 1) throw ConfigError("teeth counts must be >= 1");
  if (!(I1 > 0.0) || !(I2 > 0.0) || !std::isfinite(I1) || !std::isfinite(I2))
    throw ConfigError("moments of inertia must be positive and finite");
  if (!(V0 >= 0.0) || !std::isfinite(V0)) throw ConfigError("V0 must be non-negative and finite");
}

DerivedGeometry derive_geometry(const GearConfig& c) {
  const double I1 = c.I1(), I2 = c.I2();
  const std::int64_t n1 = c.n1(), n2 = c.n2();
  DerivedGeometry d{.config = c};
  d.I = 0.5 * (I1 + I2);
  d.n = c.n1() + c.n2();
  const double denom = static_cast<double>(n1 * n1) * I2 + static_cast<double>(n2 * n2) * I1;
  d.Ic = d.n * d.n * d.I * d.I / denom;
  d.Ir = d.n * d.n * I1 * I2 / denom;
  d.g = std::gcd(n1, n2);
  d.lcm = std::lcm(n1, n2);
  d.M1 = d.lcm / n1;
  d.M2 = d.lcm / n2;
  d.nu = (d.M1 * d.M1 * I1 + d.M2 * d.M2 * I2) / ((d.M1 + d.M2) * d.I);
  if (c.equal_inertia()) d.nu_exact = Rational(d.M1 * d.M1 + d.M2 * d.M2, d.M1 + d.M2);
  d.grid_spacing = Rational(d.n, d.g);
  d.r_cl = static_cast<double>(n1 * n2) / static_cast<double>(n1 * n1 + n2 * n2);
  d.tau_c = 4.0 * std::numbers::pi * (d.M1 * d.M1 * I1 + d.M2 * d.M2 * I2);
  d.omega0 = d.n * std::sqrt(c.V0() / d.Ir);
  d.L_r_threshold = std::sqrt(2.0 * d.Ir * c.V0());
  // L_r = (n1 Ir / (n I1)) ell for a kick on gear 1
  d.ell_threshold = d.L_r_threshold * d.n * I1 / (n1 * d.Ir);
  return d;
}

// ---------------------------------------------------------------------------
// GridSpec

std::int64_t GridSpec::first_index() const { return -floor_int((cutoff() + offset) / spacing); }

std::int64_t GridSpec::last_index() const { return floor_int((cutoff() - offset) / spacing); }

std::optional<std::size_t> GridSpec::index_of(const Rational& mu_r) const {
  const Rational j = (mu_r - offset) / spacing;
  if (!is_integer(j)) return std::nullopt;
  const auto idx = j.numerator();
  if (idx < first_index() || idx > last_index()) return std::nullopt;
  return static_cast<std::size_t>(idx - first_index());
}

// ---------------------------------------------------------------------------
// Quantum-number lattice

CollectiveMomentum momenta_to_collective(std::int64_t m1, std::int64_t m2, const DerivedGeometry& geom) {
  require_equal_inertia(geom, "exact collective momenta");
  const std::int64_t n1 = geom.n1(), n2 = geom.n2(), n = geom.n, norm = teeth_norm(geom);
  return {Rational(n * (n2 * m1 + n1 * m2), norm), Rational(n * (n1 * m1 - n2 * m2), norm)};
}

std::pair<double, double> momenta_to_collective_real(double m1, double m2, const DerivedGeometry& geom) {
  const double I1 = geom.config.I1(), I2 = geom.config.I2();
  const double n1 = geom.n1(), n2 = geom.n2();
  const double mu_c = geom.Ic / (geom.n * geom.I) * (n2 * m1 + n1 * m2);
  const double mu_r = geom.Ic / (geom.n * geom.I * geom.I) * (n1 * I2 * m1 - n2 * I1 * m2);
  return {mu_c, mu_r};
}

std::pair<std::int64_t, std::int64_t> collective_to_momenta(const CollectiveMomentum& mu,
                                                            const DerivedGeometry& geom) {
  require_equal_inertia(geom, "exact collective momenta");
  const Rational n1(geom.n1()), n2(geom.n2()), n(geom.n);
  const Rational m1 = (n2 * mu.mu_c + n1 * mu.mu_r) / n;
  const Rational m2 = (n1 * mu.mu_c - n2 * mu.mu_r) / n;
  if (!is_integer(m1) || !is_integer(m2))
    throw NonPhysical("(mu_c, mu_r) = (" + to_string(mu.mu_c) + ", " + to_string(mu.mu_r) +
                      ") has no integer preimage");
  return {m1.numerator(), m2.numerator()};
}

bool is_physical_mu_c(const Rational& mu_c, const DerivedGeometry& geom) {
  require_equal_inertia(geom, "exact collective momenta");
  // mu_c must be a multiple of 1/nu = n g / (n1^2 + n2^2)
  return is_integer(mu_c * teeth_norm(geom) / (geom.n * geom.g));
}

GridSpec allowed_relative_grid(const Rational& mu_c, const DerivedGeometry& geom, int J) {
  require_equal_inertia(geom, "allowed_relative_grid");
  if (!is_physical_mu_c(mu_c, geom)) throw NonPhysical("mu_c = " + to_string(mu_c) + " is unreachable");
  const std::int64_t n1 = geom.n1(), n2 = geom.n2();
  // Solve n2 m1 + n1 m2 = K for one integer pair.
  const Rational K = mu_c * teeth_norm(geom) / geom.n;
  const auto [g, x, y] = extended_gcd(n2, n1);
  const std::int64_t scale = K.numerator() / g;
  const auto mu = momenta_to_collective(x * scale, y * scale, geom);
  return GridSpec{centered_residue(mu.mu_r, geom.grid_spacing), geom.grid_spacing, J};
}

// ---------------------------------------------------------------------------
// Angular momentum transforms

std::pair<double, double> angular_momentum_split(double L_c, double L_r, const DerivedGeometry& geom) {
  const double n1 = geom.n1(), n2 = geom.n2(), n = geom.n;
  const double L1 = n2 * geom.config.I1() / (n * geom.I) * L_c + n1 / n * L_r;
  const double L2 = n1 * geom.config.I2() / (n * geom.I) * L_c - n2 / n * L_r;
  return {L1, L2};
}

std::pair<double, double> collective_from_gear_momenta(double L1, double L2, const DerivedGeometry& geom) {
  const double n1 = geom.n1(), n2 = geom.n2(), n = geom.n;
  const double L_c = n2 * geom.Ic / (n * geom.I) * L1 + n1 * geom.Ic / (n * geom.I) * L2;
  const double L_r = n1 * geom.Ir / (n * geom.config.I1()) * L1 - n2 * geom.Ir / (n * geom.config.I2()) * L2;
  return {L_c, L_r};
}

}  // namespace gears
