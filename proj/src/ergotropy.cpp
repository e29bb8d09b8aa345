#include "gears/ergotropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "gears/errors.hpp"

namespace gears {

namespace {

constexpr double kKineticFloor = 1e-12;

double level_energy(std::int64_t m, double inertia) {
  const auto mm = static_cast<double>(m);
  return mm * mm / (2.0 * inertia);
}

// Slot i of the passive ordering: 0, 1, -1, 2, -2, ...
std::int64_t passive_level(std::size_t i) {
  if (i == 0) return 0;
  const auto m = static_cast<std::int64_t>((i + 1) / 2);
  return (i % 2 == 1) ? m : -m;
}

}  // namespace

double MomentumDistribution::total() const {
  double s = 0.0;
  for (const auto& [m, p] : probabilities) s += p;
  return s;
}

double MomentumDistribution::mean() const {
  double s = 0.0;
  for (const auto& [m, p] : probabilities) s += p * static_cast<double>(m);
  return s;
}

double MomentumDistribution::energy() const {
  double s = 0.0;
  for (const auto& [m, p] : probabilities) s += p * level_energy(m, inertia);
  return s;
}

MomentumDistribution reduced_gear2(const RotorState& state) {
  MomentumDistribution dist;
  dist.inertia = state.geom.config.I2();
  for (std::size_t i = 0; i < state.grid.size(); ++i) {
    const double p = std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    const auto m2 = state.gear_momenta(i).second;
    if (!dist.probabilities.emplace(m2, p).second)
      throw InternalInconsistency("two occupied relative momenta map to the same m2");
  }
  return dist;
}

MomentumDistribution passive_state(const MomentumDistribution& dist) {
  std::vector<std::pair<std::int64_t, double>> entries(dist.probabilities.begin(), dist.probabilities.end());
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    if (std::llabs(a.first) != std::llabs(b.first)) return std::llabs(a.first) < std::llabs(b.first);
    return a.first > b.first;
  });
  MomentumDistribution out;
  out.inertia = dist.inertia;
  std::size_t slot = 0;
  for (const auto& [m, p] : entries) {
    if (p <= 0.0) continue;
    out.probabilities[passive_level(slot++)] = p;
  }
  return out;
}

ErgotropyReport ergotropy(const MomentumDistribution& dist) {
  ErgotropyReport r;
  r.kinetic = dist.energy();
  const double mean = dist.mean();
  r.net_kinetic = mean * mean / (2.0 * dist.inertia);
  r.ergotropy = r.kinetic - passive_state(dist).energy();
  // Summation-order round-off on an exactly passive input.
  if (r.ergotropy < 0.0 && r.ergotropy > -1e-14 * (1.0 + r.kinetic)) r.ergotropy = 0.0;
  if (r.kinetic >= kKineticFloor) {
    r.ergotropy_ratio = r.ergotropy / r.kinetic;
    r.net_ratio = r.net_kinetic / r.kinetic;
  }
  return r;
}

std::vector<ErgotropySample> ergotropy_time_series(const GearConfig& config, const KickProtocol& protocol,
                                                   const std::vector<double>& t_grid, EigenSystemCache& cache) {
  const RotorState start = prepare(config, protocol, cache);
  const auto states = evolve_series(start, t_grid, cache);
  std::vector<ErgotropySample> out;
  out.reserve(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) out.push_back({t_grid[i], ergotropy(reduced_gear2(states[i]))});
  return out;
}

}  // namespace gears
