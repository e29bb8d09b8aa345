#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gears/rational.hpp"

namespace gears {

/// Even interlocking profile u(x) = a_0 + sum_{p>=1} a_p cos(p x).
class PotentialSpec {
 public:
  struct Harmonic {
    int p;
    double a;
  };

  /// u(x) = (1 + cos x) / 2.
  PotentialSpec();
  explicit PotentialSpec(std::vector<Harmonic> harmonics);

  const std::vector<Harmonic>& harmonics() const { return harmonics_; }

  double constant() const;
  int max_harmonic() const;

  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;

  /// Upper bound on |u''| used for integrator step checks.
  double curvature_bound() const;

  /// Global maximum and minimum of u over one period: {x_max, u_max, x_min, u_min}.
  struct Extrema {
    double x_max, u_max, x_min, u_min;
  };
  Extrema extrema() const;

  bool operator==(const PotentialSpec& other) const;

 private:
  std::vector<Harmonic> harmonics_;
};

/// Physical parameters of a gear pair, in units hbar = I_ref = 1.
class GearConfig {
 public:
  GearConfig(int n1, int n2, double I1, double I2, double V0, PotentialSpec potential = {});

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double I1() const { return I1_; }
  double I2() const { return I2_; }
  double V0() const { return V0_; }
  const PotentialSpec& potential() const { return potential_; }

  bool equal_inertia() const { return I1_ == I2_; }

  GearConfig with_V0(double V0) const { return {n1_, n2_, I1_, I2_, V0, potential_}; }

 private:
  int n1_, n2_;
  double I1_, I2_, V0_;
  PotentialSpec potential_;
};

/// Constants derived once from a GearConfig.
struct DerivedGeometry {
  GearConfig config;

  double I = 0;   // mean inertia (I1 + I2) / 2
  int n = 0;      // n1 + n2
  double Ic = 0;  // centre-of-mass inertia
  double Ir = 0;  // relative inertia
  std::int64_t M1 = 0, M2 = 0, g = 0, lcm = 0;
  double nu = 0;
  std::optional<Rational> nu_exact{};  // only for I1 == I2
  Rational grid_spacing{};           // n / g, relative-momentum step for I1 == I2
  double r_cl = 0;                   // n1 n2 / (n1^2 + n2^2)
  double tau_c = 0;                  // revival time 4 pi (M1^2 I1 + M2^2 I2)
  double omega0 = 0;                 // n sqrt(V0 / Ir)
  double L_r_threshold = 0;          // sqrt(2 Ir V0)
  double ell_threshold = 0;          // single-kick threshold on gear 1

  int n1() const { return config.n1(); }
  int n2() const { return config.n2(); }
  double V0() const { return config.V0(); }
  bool equal_inertia() const { return config.equal_inertia(); }
};

DerivedGeometry derive_geometry(const GearConfig& config);

/// Exact eigenvalues (mu_c, mu_r) of (L_c, L_r) in units of hbar.
struct CollectiveMomentum {
  Rational mu_c;
  Rational mu_r;

  bool operator==(const CollectiveMomentum&) const = default;
};

/// Relative-momentum lattice {offset + spacing * j} for one fixed mu_c,
/// truncated to the symmetric window |mu_r| <= spacing * J.
///
/// The offset is the lattice representative in (-spacing/2, spacing/2], so
/// the window holds 2J+1 points when the offset is zero and 2J otherwise,
/// and is mirror symmetric whenever the lattice itself is.
struct GridSpec {
  Rational offset;
  Rational spacing;
  int J = 32;

  std::int64_t first_index() const;
  std::int64_t last_index() const;
  std::size_t size() const { return static_cast<std::size_t>(last_index() - first_index() + 1); }
  Rational cutoff() const { return spacing * J; }
  Rational point(std::size_t i) const { return offset + spacing * (first_index() + static_cast<std::int64_t>(i)); }
  /// Position of an exact lattice momentum, if it is inside the window.
  std::optional<std::size_t> index_of(const Rational& mu_r) const;

  bool operator==(const GridSpec&) const = default;
};

/// (m1, m2) -> (mu_c, mu_r) for equal inertia, evaluated exactly.
CollectiveMomentum momenta_to_collective(std::int64_t m1, std::int64_t m2, const DerivedGeometry& geom);

/// Same map for arbitrary inertia, in floating point.
std::pair<double, double> momenta_to_collective_real(double m1, double m2, const DerivedGeometry& geom);

/// Integer preimage (m1, m2); throws NonPhysical if it is not integral.
std::pair<std::int64_t, std::int64_t> collective_to_momenta(const CollectiveMomentum& mu, const DerivedGeometry& geom);

bool is_physical_mu_c(const Rational& mu_c, const DerivedGeometry& geom);

GridSpec allowed_relative_grid(const Rational& mu_c, const DerivedGeometry& geom, int J = 32);

/// Expectation values (L1, L2) from (L_c, L_r).
std::pair<double, double> angular_momentum_split(double L_c, double L_r, const DerivedGeometry& geom);

/// (L_c, L_r) from (L1, L2).
std::pair<double, double> collective_from_gear_momenta(double L1, double L2, const DerivedGeometry& geom);

/// Bloch wave number of a relative momentum: mu_r mod n in (-n/2, n/2].
inline Rational bloch_label(const Rational& mu_r, const DerivedGeometry& geom) {
  return centered_residue(mu_r, Rational(geom.n));
}

}  // namespace gears
