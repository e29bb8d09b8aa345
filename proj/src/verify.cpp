#include "gears/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

#include "gears/classical.hpp"
#include "gears/dynamics.hpp"
#include "gears/ergotropy.hpp"
#include "gears/lattice_oracle.hpp"

namespace gears {

namespace {

constexpr double kExact = 1e-9;         // diagonal-ensemble identities
constexpr double kClassical = 1e-6;     // classical simulator vs closed form
constexpr double kPeriodRel = 0.05;     // averaging-period estimates
constexpr double kBandSym = 1e-10;      // E(k) = E(-k)
constexpr double kPhase = 1e-10;        // revival phases
constexpr double kOracle = 1e-8;        // pipeline vs lattice oracle
constexpr double kConserved = 1e-10;    // norm, energy, L_c
constexpr double kOrdering = 1e-12;     // slack for ergotropy inequalities

std::string fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c);
  return buf;
}

const GearConfig& pair22() {
  static const GearConfig c(2, 2, 1.0, 1.0, 10.0);
  return c;
}
const GearConfig& pair42() {
  static const GearConfig c(4, 2, 1.0, 1.0, 10.0);
  return c;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = a + (b - a) * i / (n - 1);
  return t;
}

// Classical r from a numerically integrated time average over whole periods.
double simulated_classical_r(const GearConfig& config, int ell) {
  const DerivedGeometry geom = derive_geometry(config);
  const ClassicalState s = classical_after_protocol(config, KickProtocol::single(ell));
  const double dt = 1e-3 * 2.0 * std::numbers::pi / geom.omega0;
  const NumericAverage avg = numeric_relative_average(s, geom, 20, dt);
  return angular_momentum_split(s.L_c, avg.L_r_bar, geom).second / ell;
}

CheckResult classical_benchmark(EigenSystemCache&) {
  const double r22 = derive_geometry(pair22()).r_cl, r42 = derive_geometry(pair42()).r_cl;
  const double closed22 = *classical_transmission(pair22(), KickProtocol::single(6)).r;
  const double closed42 = *classical_transmission(pair42(), KickProtocol::single(4)).r;
  const double sim22 = simulated_classical_r(pair22(), 6);
  const double sim42 = simulated_classical_r(pair42(), 4);
  const double err = std::max({std::abs(closed22 - 0.5), std::abs(closed42 - 0.4), std::abs(sim22 - 0.5),
                               std::abs(sim42 - 0.4)});
  const bool ok = r22 == 0.5 && std::abs(r42 - 0.4) < 1e-15 && err < kClassical;
  return {1, "classical benchmark ratios", ok, fmt("r_cl=(%.15g, %.15g) max simulator error %.3g", r22, r42, err)};
}

CheckResult quantum_enhancement(EigenSystemCache& cache) {
  double worst = 0.0;
  for (int ell : {2, 4, 6, 8, 10, 12})
    worst = std::max(worst, std::abs(*transmission_ratio(pair22(), KickProtocol::single(ell), cache).r - 0.5));
  for (int ell : {5, 10})
    worst = std::max(worst, std::abs(*transmission_ratio(pair42(), KickProtocol::single(ell), cache).r - 0.4));
  return {2, "quantum enhancement at commensurate kicks", worst < kExact, fmt("max |r - r_cl| = %.3g", worst)};
}

CheckResult tunneling_reduction(EigenSystemCache& cache) {
  double worst = 0.0;
  for (int ell : {1, 3, 5}) worst = std::max(worst, *transmission_ratio(pair22(), KickProtocol::single(ell), cache).r);
  const double shallow = *transmission_ratio(pair22(), KickProtocol::single(1), cache).r;
  const double deep = *transmission_ratio(pair22().with_V0(40.0), KickProtocol::single(1), cache).r;
  const bool ok = worst < 0.5 && deep > shallow;
  return {3, "tunneling reduction and depth dependence", ok,
          fmt("max r(1,3,5) = %.12g; r(V0=10) = %.12g, r(V0=40) = %.12g", worst, shallow, deep)};
}

CheckResult long_time_averages(EigenSystemCache& cache) {
  const auto six = transmission_ratio(pair22(), KickProtocol::single(6), cache);
  const auto ten = transmission_ratio(pair22(), KickProtocol::single(10), cache);
  const double err = std::max({std::abs(six.L1_bar - 3), std::abs(six.L2_bar - 3), std::abs(ten.L2_bar - 5)});
  return {4, "long-time averaged gear momenta", err < kExact,
          fmt("L(6) = (%.12g, %.12g), L2(10) = %.12g", six.L1_bar, six.L2_bar, ten.L2_bar)};
}

CheckResult averaging_periods(EigenSystemCache& cache) {
  const std::pair<int, double> expected[] = {{6, 15.0}, {8, 194.0}, {10, 4836.0}, {12, 1.9e5}};
  double worst = 0.0;
  std::string detail;
  for (const auto& [ell, T] : expected) {
    const double got = transmission_ratio(pair22(), KickProtocol::single(ell), cache).averaging_period;
    worst = std::max(worst, std::abs(got / T - 1.0));
    detail += fmt("T(%g) = %.6g ", ell, got);
  }
  return {5, "averaging-period estimates", worst <= kPeriodRel, detail + fmt("max rel err %.3g", worst)};
}

CheckResult band_structure_check(EigenSystemCache&) {
  const DerivedGeometry geom = derive_geometry(GearConfig(3, 3, 1.0, 1.0, 20.0));
  const BandStructure bs = band_structure(geom, 3);
  const auto ks = bs.wave_numbers();
  bool ok = ks.size() == 6;
  for (int j = 1; j <= 3; ++j) ok = ok && bs.band(j).size() == 6;
  for (const auto& e : bs.entries) ok = ok && (e.band <= 2 ? e.energy < 0.0 : e.energy > 0.0);
  double asym = 0.0;
  for (const auto& a : bs.entries) {
    const Rational mirror = centered_residue(-a.k, Rational(geom.n));
    for (const auto& b : bs.entries)
      if (b.band == a.band && b.k == mirror) asym = std::max(asym, std::abs(a.energy - b.energy));
  }
  ok = ok && asym < kBandSym;
  return {6, "band structure of (3,3), V0=20", ok,
          fmt("%g k-values, max |E(k) - E(-k)| = %.3g", static_cast<double>(ks.size()), asym)};
}

CheckResult revival_phases(EigenSystemCache&) {
  std::mt19937_64 rng(20240611);
  std::uniform_int_distribution<int> m(-60, 60);
  bool ok = true;
  double worst = 0.0;
  for (const GearConfig* config : {&pair22(), &pair42()}) {
    const DerivedGeometry geom = derive_geometry(*config);
    std::vector<Rational> mus;
    for (int i = 0; i < 50; ++i) mus.push_back(momenta_to_collective(m(rng), m(rng), geom).mu_c);
    ok = ok && revival_phase_check(mus, geom);
    for (const auto& mu : mus) {
      const double phi = com_phase(mu, geom.tau_c, geom);
      worst = std::max(worst, std::abs(std::polar(1.0, -phi) - 1.0));
    }
  }
  const double tau22 = derive_geometry(pair22()).tau_c, tau42 = derive_geometry(pair42()).tau_c;
  ok = ok && worst < kPhase && std::abs(tau22 - 8 * std::numbers::pi) < 1e-12 &&
       std::abs(tau42 - 20 * std::numbers::pi) < 1e-12;
  return {7, "centre-of-mass revival phases", ok,
          fmt("tau_c = %.12g, %.12g; max |phase - 1| = %.3g", tau22, tau42, worst)};
}

CheckResult oscillation_timescale(EigenSystemCache&) {
  const double T = 2.0 * std::numbers::pi / derive_geometry(pair22()).omega0;
  return {8, "relative oscillation timescale", std::abs(T - 0.70) <= 0.01, fmt("2 pi / omega0 = %.6g", T)};
}

CheckResult multi_kick_invariance(EigenSystemCache& cache) {
  double worst = 0.0;
  for (double dt : {0.1, 1.0, 10.0, 37.7}) worst = std::max(worst, std::abs(*multi_kick(pair22(), 12, dt, cache).r - 0.5));
  return {9, "multi-kick invariance at ell = 12", worst < kExact, fmt("max |r - 0.5| = %.3g", worst)};
}

CheckResult ergotropy_properties(EigenSystemCache& cache) {
  const RotorState kicked = prepare(pair22(), KickProtocol::single(6), cache);
  const auto states = evolve_series(kicked, linspace(0.0, 50.0, 201), cache);
  bool ok = true;
  double worst_margin = 0.0;
  for (const auto& s : states) {
    const MomentumDistribution d = reduced_gear2(s);
    const ErgotropyReport r = ergotropy(d);
    ok = ok && r.net_kinetic >= -kOrdering && r.net_kinetic <= r.ergotropy + kOrdering &&
         r.ergotropy <= r.kinetic + kOrdering;
    if (r.ergotropy_ratio && r.net_ratio) ok = ok && *r.ergotropy_ratio >= *r.net_ratio - kOrdering;
    const double L = d.mean(), I2 = d.inertia;
    for (int m = -12; m <= 12; ++m) {
      const double extracted = (2.0 * m * L - static_cast<double>(m) * m) / (2.0 * I2);
      worst_margin = std::min(worst_margin, r.ergotropy - extracted);
    }
  }
  ok = ok && worst_margin >= -kOrdering;
  return {10, "ergotropy ordering and kick-extraction bound", ok,
          fmt("min(E - kick extraction) = %.3g", std::min(0.0, worst_margin))};
}

CheckResult oracle_equivalence(EigenSystemCache& cache) {
  const auto times = linspace(0.0, 50.0, 51);
  double worst = 0.0;
  for (int ell : {1, 3, 6}) {
    const KickProtocol p = KickProtocol::single(ell);
    const auto lattice = oracle::oracle_run(pair22(), p, times, 24);
    const auto states = evolve_series(prepare(pair22(), p, cache), times, cache);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto& o = lattice.values[i];
      const Observables q = observables(states[i]);
      worst = std::max({worst, std::abs(o.L1 - q.L1), std::abs(o.L2 - q.L2), std::abs(o.L2_sq - q.L2_sq)});
      const MomentumDistribution d = reduced_gear2(states[i]);
      std::map<std::int64_t, double> diff = o.gear2;
      for (const auto& [m, prob] : d.probabilities) diff[m] -= prob;
      for (const auto& [m, delta] : diff) worst = std::max(worst, std::abs(delta));
    }
  }
  return {11, "lattice oracle equivalence", worst < kOracle, fmt("max deviation %.3g", worst)};
}

CheckResult conservation(EigenSystemCache& cache) {
  const DerivedGeometry geom = derive_geometry(pair22());
  const double n1 = geom.n1(), n2 = geom.n2();
  double worst = 0.0;
  auto track = [&](const std::vector<Observables>& series) {
    const Observables& first = series.front();
    for (const auto& o : series) {
      worst = std::max({worst, std::abs(o.norm - 1.0), std::abs(o.H_r - first.H_r),
                        std::abs(n2 * o.L1 + n1 * o.L2 - (n2 * first.L1 + n1 * first.L2))});
    }
  };
  const auto times = linspace(0.0, 50.0, 101);
  for (int ell : {1, 3, 6, 13}) track(time_series(prepare(pair22(), KickProtocol::single(ell), cache), times, cache).values);

  // Between the kicks of a multi-kick run.
  RotorState s = ground_state(geom, cache);
  for (int k = 0; k < 6; ++k) {
    s = apply_kick(s, 1, 0);
    const auto states = evolve_series(s, linspace(0.0, 1.0, 11), cache);
    std::vector<Observables> series;
    for (const auto& st : states) series.push_back(observables(st));
    track(series);
    s = states.back();
  }

  // The lattice oracle obeys the same laws in its own basis.
  const auto lattice = oracle::oracle_run(pair22(), KickProtocol::single(3), linspace(0.0, 20.0, 21), 24);
  for (const auto& o : lattice.values) {
    const auto& f = lattice.values.front();
    worst = std::max({worst, std::abs(o.norm - 1.0), std::abs(o.energy - f.energy),
                      std::abs(n2 * o.L1 + n1 * o.L2 - (n2 * f.L1 + n1 * f.L2))});
  }
  return {12, "conservation of norm, energy and L_c", worst < kConserved, fmt("max drift %.3g", worst)};
}

CheckResult multi_kick_sweep(EigenSystemCache& cache) {
  // Short waits: below the ~0.7 oscillation period. Long waits: several periods.
  double short_min = 1.0, long_max = 0.0;
  std::vector<double> plateau;
  for (int j = 1; j <= 200; ++j) {
    const double dt = 0.05 * j;
    const double r = *multi_kick(pair22(), 13, dt, cache).r;
    if (dt <= 0.2) short_min = std::min(short_min, r);
    if (dt >= 2.0) {
      long_max = std::max(long_max, r);
      plateau.push_back(r);
    }
  }
  std::nth_element(plateau.begin(), plateau.begin() + static_cast<long>(plateau.size() / 2), plateau.end());
  const double median = plateau[plateau.size() / 2];
  const bool ok = long_max >= 0.45 && short_min < median;
  return {13, "multi-kick waiting-time dependence at ell = 13", ok,
          fmt("short-wait min %.6g, long-wait max %.6g, long-wait median %.6g", short_min, long_max, median)};
}

using Check = std::function<CheckResult(EigenSystemCache&)>;

const std::vector<Check>& checks() {
  static const std::vector<Check> all{classical_benchmark, quantum_enhancement, tunneling_reduction,
                                      long_time_averages,  averaging_periods,   band_structure_check,
                                      revival_phases,      oscillation_timescale, multi_kick_invariance,
                                      ergotropy_properties, oracle_equivalence, conservation,
                                      multi_kick_sweep};
  return all;
}

}  // namespace

int acceptance_check_count() { return static_cast<int>(checks().size()); }

CheckResult run_acceptance_check(int id, EigenSystemCache& cache) {
  if (id < 1 || id > acceptance_check_count()) throw std::out_of_range("no acceptance check " + std::to_string(id));
  try {
    return checks()[static_cast<std::size_t>(id - 1)](cache);
  } catch (const std::exception& e) {
    return {id, "check " + std::to_string(id), false, std::string("threw: ") + e.what()};
  }
}

std::vector<CheckResult> run_acceptance_checks(EigenSystemCache& cache) {
  std::vector<CheckResult> out;
  for (int id = 1; id <= acceptance_check_count(); ++id) out.push_back(run_acceptance_check(id, cache));
  return out;
}

}  // namespace gears
