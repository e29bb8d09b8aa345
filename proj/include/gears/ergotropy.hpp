#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "gears/dynamics.hpp"

namespace gears {

/// Diagonal reduced state of one gear: probabilities over integer momentum quanta.
struct MomentumDistribution {
  std::map<std::int64_t, double> probabilities;
  double inertia = 1.0;

  double total() const;
  double mean() const;
  double energy() const;  // sum p_m m^2 / 2I
};

struct ErgotropyReport {
  double ergotropy = 0;
  double kinetic = 0;      // <L^2> / 2I
  double net_kinetic = 0;  // <L>^2 / 2I
  std::optional<double> ergotropy_ratio;  // empty when kinetic < 1e-12
  std::optional<double> net_ratio;
};

/// rho_2 of gear 2. Throws InternalInconsistency if two occupied grid points
/// share an m2 (the reduced state would not be diagonal).
MomentumDistribution reduced_gear2(const RotorState& state);

/// Probabilities sorted descending and placed on 0, +1, -1, +2, -2, ...
/// Equal probabilities keep the order lower |m| first, positive before negative.
MomentumDistribution passive_state(const MomentumDistribution& dist);

ErgotropyReport ergotropy(const MomentumDistribution& dist);

struct ErgotropySample {
  double t;
  ErgotropyReport report;
};

/// Ground state, protocol, then the gear-2 ergotropy report at each time.
std::vector<ErgotropySample> ergotropy_time_series(const GearConfig& config, const KickProtocol& protocol,
                                                   const std::vector<double>& t_grid,
                                                   EigenSystemCache& cache = default_eigen_cache());

}  // namespace gears
