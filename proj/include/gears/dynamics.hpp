#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "gears/gear_model.hpp"
#include "gears/protocol.hpp"
#include "gears/relative_hamiltonian.hpp"

namespace gears {

/// Two-gear state with one exact centre-of-mass quantum number mu_c and
/// complex amplitudes on the allowed relative-momentum grid.
struct RotorState {
  DerivedGeometry geom;
  Rational mu_c;
  GridSpec grid;
  Eigen::VectorXcd amplitudes;
  double com_phase = 0.0;  // accumulated exp(-i mu_c^2 t / 2 Ic), radians in (-pi, pi]

  Rational mu_r(std::size_t i) const { return grid.point(i); }
  /// Integer (m1, m2) of grid point i.
  std::pair<std::int64_t, std::int64_t> gear_momenta(std::size_t i) const {
    return collective_to_momenta({mu_c, grid.point(i)}, geom);
  }
};

/// Interlocked ground state: mu_c = 0 and the lowest relative eigenvector.
RotorState ground_state(const DerivedGeometry& geom, EigenSystemCache& cache = default_eigen_cache());

/// Exact displacement of (mu_c, mu_r) by a kick (l1, l2), with the Bloch
/// decomposition delta_mu_r = delta_m_r * n + delta_k.
struct KickShift {
  Rational delta_mu_c;
  Rational delta_mu_r;
  std::int64_t delta_m_r;
  Rational delta_k;
  /// delta_k in {0, n/2}: occupied Bloch states keep <L_r> = 0.
  bool enhanced;
};

KickShift kick_shift(std::int64_t l1, std::int64_t l2, const DerivedGeometry& geom);

RotorState apply_kick(const RotorState& state, std::int64_t l1, std::int64_t l2);

RotorState evolve(const RotorState& state, double t, EigenSystemCache& cache = default_eigen_cache());

struct Observables {
  double L1 = 0, L2 = 0;
  double L1_sq = 0, L2_sq = 0;
  double L_r = 0, L_r_sq = 0;
  double L_c = 0;
  double H_r = 0;
  double norm = 0;
};

Observables observables(const RotorState& state);

struct Occupation {
  double energy;
  Rational k;
  int parity;
  double probability;
  double kinetic;  // <L_r^2> / 2 Ir of the eigenstate
};

struct TransmissionResult {
  std::optional<double> r;  // empty when ell == 0
  int ell = 0;
  double L1_bar = 0, L2_bar = 0, L_r_bar = 0;
  std::vector<Occupation> occupations;  // ascending energy
  double averaging_period = 0;          // 2 pi / |E_a - E_b| of the two most occupied states
};

/// Infinite-time average in the eigenbasis (diagonal ensemble with
/// degenerate-subspace projection). r = L2_bar / ell, or L1_bar / ell when
/// the kicks went to gear 2.
TransmissionResult long_time_average(const RotorState& state, int ell, int target_gear = 1,
                                     EigenSystemCache& cache = default_eigen_cache());

/// Occupations of every relative eigenstate across the whole Brillouin zone:
/// the state is embedded on the 1/nu lattice, so sectors it does not touch
/// appear with zero probability.
std::vector<Occupation> spectrum_occupations(const RotorState& state,
                                             EigenSystemCache& cache = default_eigen_cache());

/// Ground state followed by the protocol's kicks with delta_t waits between them.
RotorState prepare(const GearConfig& config, const KickProtocol& protocol,
                   EigenSystemCache& cache = default_eigen_cache());

TransmissionResult transmission_ratio(const GearConfig& config, const KickProtocol& protocol,
                                      EigenSystemCache& cache = default_eigen_cache());

/// ell single-quantum kicks on gear 1 separated by delta_t.
TransmissionResult multi_kick(const GearConfig& config, int ell, double delta_t,
                              EigenSystemCache& cache = default_eigen_cache());

struct TimeSeries {
  std::vector<double> t;
  std::vector<Observables> values;
};

/// States at each time of a sorted, non-negative grid; one eigendecomposition.
std::vector<RotorState> evolve_series(const RotorState& state, const std::vector<double>& t_grid,
                                      EigenSystemCache& cache = default_eigen_cache());

TimeSeries time_series(const RotorState& state, const std::vector<double>& t_grid,
                       EigenSystemCache& cache = default_eigen_cache());

/// Centre-of-mass phase mu_c^2 t / 2 Ic reduced to (-pi, pi].
double com_phase(const Rational& mu_c, double t, const DerivedGeometry& geom);

/// True iff every mu_c rephases at the revival time tau_c (to 1e-10).
bool revival_phase_check(const std::vector<Rational>& mu_c_values, const DerivedGeometry& geom);

}  // namespace gears
