#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "gears/gear_model.hpp"

namespace gears {

/// H_r = L_r^2 / 2 Ir - V0 u(n theta_r) in the momentum basis of one grid.
/// The potential harmonic p couples points whose momenta differ by p n.
struct BandedHamiltonian {
  struct Band {
    int steps;        // grid-index distance
    double coupling;  // -V0 a_p / 2
  };

  GridSpec grid;
  Rational period;                 // n, the Bloch period in mu_r
  std::vector<Rational> momenta;   // exact mu_r per grid point
  Eigen::VectorXd diagonal;
  std::vector<Band> bands;

  Eigen::Index size() const { return diagonal.size(); }
  int bandwidth() const;
  Eigen::MatrixXd dense() const;
  /// y = H x
  template <typename Derived>
  auto apply(const Eigen::MatrixBase<Derived>& x) const;
};

template <typename Derived>
auto BandedHamiltonian::apply(const Eigen::MatrixBase<Derived>& x) const {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = diagonal.cast<Scalar>().cwiseProduct(x);
  const Eigen::Index dim = size();
  for (const auto& b : bands) {
    const Eigen::Index len = dim - b.steps;
    if (len <= 0) continue;
    y.head(len) += b.coupling * x.segment(b.steps, len);
    y.tail(len) += b.coupling * x.head(len);
  }
  return y;
}

/// Full spectrum of one grid, decomposed by Bloch sector and, for the
/// parity-invariant sectors k = 0 and k = n/2, by parity.
struct EigenSystem {
  Eigen::VectorXd energies;       // ascending
  Eigen::MatrixXd vectors;        // columns are eigenvectors over grid points
  std::vector<Rational> bloch_k;  // per state
  std::vector<int> parity;        // +1 / -1, 0 if the sector is not parity-invariant
  std::vector<int> block;         // symmetry block id; states in different blocks never mix

  Eigen::Index size() const { return energies.size(); }
};

/// Degeneracy grouping tolerance for eigenvalue E.
inline double degeneracy_tolerance(double E) { return 1e-9 * std::max(1.0, std::abs(E)); }

BandedHamiltonian build_hamiltonian(const GridSpec& grid, const DerivedGeometry& geom);

EigenSystem eigendecompose(const BandedHamiltonian& H);

struct BandEnergy {
  Rational k;
  int band;  // 1-based
  double energy;
};

struct BandStructure {
  std::vector<BandEnergy> entries;  // sorted by band, then k

  std::vector<Rational> wave_numbers() const;
  std::vector<double> band(int j) const;
};

/// All physically allowed Bloch wave numbers in (-n/2, n/2].
std::vector<Rational> brillouin_zone(const DerivedGeometry& geom);

/// Lowest num_bands energies in every allowed Bloch sector.
BandStructure band_structure(const DerivedGeometry& geom, int num_bands, int min_J = 32);

/// Grid over every physical relative momentum (spacing 1/nu, all Bloch
/// sectors at once) whose window covers at least min_cutoff.
GridSpec full_zone_grid(const DerivedGeometry& geom, const Rational& min_cutoff);

/// Probability on the outer 10% of grid points at either end.
double tail_probability(const Eigen::Ref<const Eigen::VectorXcd>& amplitudes);
double tail_probability(const Eigen::Ref<const Eigen::VectorXd>& amplitudes);

inline constexpr double kTailTolerance = 1e-12;
inline constexpr int kMinimumJ = 32;

/// Thread-safe memo of eigensystems keyed by grid and Hamiltonian parameters.
class EigenSystemCache {
 public:
  std::shared_ptr<const EigenSystem> get(const GridSpec& grid, const DerivedGeometry& geom);
  std::size_t size() const;
  void clear();

 private:
  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t, int, int, double, double,
                         std::vector<std::pair<int, double>>>;
  static Key make_key(const GridSpec& grid, const DerivedGeometry& geom);

  mutable std::shared_mutex mutex_;
  std::map<Key, std::shared_ptr<const EigenSystem>> entries_;
};

EigenSystemCache& default_eigen_cache();

}  // namespace gears
