#include "gears/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include "gears/errors.hpp"

namespace gears {

namespace {

using cplx = std::complex<double>;
constexpr int kMaxJ = 1 << 14;

void require_equal_inertia(const DerivedGeometry& geom) {
  if (!geom.equal_inertia()) throw UnsupportedInertia("quantum dynamics requires I1 == I2");
}

int minimum_J(const DerivedGeometry& geom) {
  return std::max<int>(kMinimumJ, 2 * geom.config.potential().max_harmonic() * static_cast<int>(geom.g));
}

// Amplitudes of `state` displaced by delta_mu_r and embedded in `target`.
Eigen::VectorXcd embed(const RotorState& state, const GridSpec& target, const Rational& delta_mu_r) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(target.size()));
  for (std::size_t i = 0; i < state.grid.size(); ++i) {
    const cplx c = state.amplitudes[static_cast<Eigen::Index>(i)];
    const auto j = target.index_of(state.grid.point(i) + delta_mu_r);
    if (j)
      out[static_cast<Eigen::Index>(*j)] = c;
    else if (c != cplx{})
      throw InternalInconsistency("occupied grid point fell outside the re-truncated grid");
  }
  return out;
}

RotorState grow(const RotorState& state) {
  if (state.grid.J >= kMaxJ) throw TruncationBreach("relative-momentum grid exceeded the maximum size");
  RotorState out = state;
  out.grid.J = state.grid.J * 2;
  out.amplitudes = embed(state, out.grid, Rational(0));
  return out;
}

double wrap_phase(double phi) { return std::remainder(phi, 2.0 * std::numbers::pi); }

}  // namespace

RotorState ground_state(const DerivedGeometry& geom, EigenSystemCache& cache) {
  require_equal_inertia(geom);
  for (int J = minimum_J(geom); J <= kMaxJ; J *= 2) {
    const GridSpec grid = allowed_relative_grid(Rational(0), geom, J);
    const auto es = cache.get(grid, geom);
    const Eigen::VectorXd v = es->vectors.col(0);
    if (tail_probability(v) >= kTailTolerance) continue;
    if (es->bloch_k[0] != 0)
      throw InternalInconsistency("lowest state of the mu_c = 0 grid is not in the k = 0 sector");
    Eigen::Index imax;
    v.cwiseAbs().maxCoeff(&imax);
    RotorState s{geom, Rational(0), grid, (v[imax] < 0 ? -v : v).cast<cplx>(), 0.0};
    return s;
  }
  throw TruncationBreach("ground state did not fit on the relative-momentum grid");
}

KickShift kick_shift(std::int64_t l1, std::int64_t l2, const DerivedGeometry& geom) {
  const auto d = momenta_to_collective(l1, l2, geom);
  const Rational n(geom.n);
  KickShift k;
  k.delta_mu_c = d.mu_c;
  k.delta_mu_r = d.mu_r;
  k.delta_k = centered_residue(d.mu_r, n);
  k.delta_m_r = ((d.mu_r - k.delta_k) / n).numerator();
  k.enhanced = k.delta_k == 0 || k.delta_k == n / 2;
  return k;
}

RotorState apply_kick(const RotorState& state, std::int64_t l1, std::int64_t l2) {
  if (l1 == 0 && l2 == 0) return state;
  const KickShift shift = kick_shift(l1, l2, state.geom);

  RotorState out = state;
  out.mu_c = state.mu_c + shift.delta_mu_c;
  out.grid.offset = centered_residue(state.grid.offset + shift.delta_mu_r, state.grid.spacing);

  // Lossless: every old grid point must land inside the new window.
  Rational reach(0);
  for (std::size_t i : {std::size_t{0}, state.grid.size() - 1})
    reach = std::max(reach, boost::abs(state.grid.point(i) + shift.delta_mu_r));
  const std::int64_t needed = floor_int(reach / state.grid.spacing) + 1;
  out.grid.J = static_cast<int>(std::max<std::int64_t>(state.grid.J, needed));
  out.amplitudes = embed(state, out.grid, shift.delta_mu_r);
  while (tail_probability(out.amplitudes) >= kTailTolerance) out = grow(out);
  return out;
}

RotorState evolve(const RotorState& state, double t, EigenSystemCache& cache) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be non-negative");
  require_equal_inertia(state.geom);
  if (t == 0.0) return state;
  RotorState current = state;
  for (;;) {
    const auto es = cache.get(current.grid, current.geom);
    Eigen::VectorXcd d = es->vectors.transpose() * current.amplitudes;
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] *= std::polar(1.0, -es->energies[i] * t);
    RotorState out = current;
    out.amplitudes = es->vectors * d;
    if (tail_probability(out.amplitudes) < kTailTolerance) {
      out.com_phase = wrap_phase(state.com_phase + com_phase(state.mu_c, t, state.geom));
      return out;
    }
    current = grow(current);
  }
}

Observables observables(const RotorState& state) {
  const auto& geom = state.geom;
  Observables o;
  double L2_direct = 0.0;
  for (std::size_t i = 0; i < state.grid.size(); ++i) {
    const double p = std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    const double mu = to_double(state.grid.point(i));
    const auto [m1, m2] = state.gear_momenta(i);
    o.norm += p;
    o.L_r += p * mu;
    o.L_r_sq += p * mu * mu;
    o.L1_sq += p * static_cast<double>(m1 * m1);
    o.L2_sq += p * static_cast<double>(m2 * m2);
    L2_direct += p * static_cast<double>(m2);
  }
  o.L_c = to_double(state.mu_c) * o.norm;
  std::tie(o.L1, o.L2) = angular_momentum_split(o.L_c, o.L_r, geom);
  if (std::abs(o.L2 - L2_direct) > 1e-10 * (1.0 + std::abs(L2_direct)))
    throw InternalInconsistency("L2 from the collective split disagrees with the integer preimage");

  const BandedHamiltonian H = build_hamiltonian(state.grid, geom);
  o.H_r = state.amplitudes.dot(H.apply(state.amplitudes)).real();
  return o;
}

TransmissionResult long_time_average(const RotorState& state, int ell, int target_gear, EigenSystemCache& cache) {
  require_equal_inertia(state.geom);
  const auto& geom = state.geom;
  const auto es = cache.get(state.grid, geom);
  const Eigen::Index dim = es->size();
  const Eigen::VectorXcd d = es->vectors.transpose() * state.amplitudes;

  Eigen::VectorXd mu(dim);
  for (Eigen::Index i = 0; i < dim; ++i) mu[i] = to_double(state.grid.point(static_cast<std::size_t>(i)));

  TransmissionResult res;
  res.ell = ell;
  res.occupations.reserve(static_cast<std::size_t>(dim));
  double norm = 0.0;
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double p = std::norm(d[c]);
    norm += p;
    const double kinetic = es->vectors.col(c).cwiseAbs2().dot(mu.cwiseAbs2()) / (2.0 * geom.Ir);
    res.occupations.push_back({es->energies[c], es->bloch_k[c], es->parity[c], p, kinetic});
  }

  // <P_E psi | L_r | P_E psi> summed over eigenspaces; eigenspaces never span two blocks.
  std::map<int, std::vector<Eigen::Index>> blocks;
  for (Eigen::Index c = 0; c < dim; ++c) blocks[es->block[static_cast<std::size_t>(c)]].push_back(c);
  double Lr_bar = 0.0;
  for (const auto& [id, members] : blocks) {
    std::size_t start = 0;
    while (start < members.size()) {
      std::size_t end = start + 1;
      while (end < members.size() && es->energies[members[end]] - es->energies[members[end - 1]] <=
                                         degeneracy_tolerance(es->energies[members[end]]))
        ++end;
      Eigen::VectorXcd projected = Eigen::VectorXcd::Zero(dim);
      for (std::size_t a = start; a < end; ++a) projected += d[members[a]] * es->vectors.col(members[a]);
      Lr_bar += projected.cwiseAbs2().dot(mu);
      start = end;
    }
  }

  res.L_r_bar = Lr_bar;
  std::tie(res.L1_bar, res.L2_bar) = angular_momentum_split(to_double(state.mu_c) * norm, Lr_bar, geom);
  if (ell != 0) res.r = (target_gear == 1 ? res.L2_bar : res.L1_bar) / ell;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return res.occupations[static_cast<std::size_t>(a)].probability >
           res.occupations[static_cast<std::size_t>(b)].probability;
  });
  res.averaging_period = std::numeric_limits<double>::infinity();
  if (dim >= 2) {
    const double gap = std::abs(es->energies[order[0]] - es->energies[order[1]]);
    if (gap > 0.0) res.averaging_period = 2.0 * std::numbers::pi / gap;
  }
  return res;
}

std::vector<Occupation> spectrum_occupations(const RotorState& state, EigenSystemCache& cache) {
  require_equal_inertia(state.geom);
  RotorState full = state;
  full.grid = full_zone_grid(state.geom, state.grid.cutoff() + boost::abs(state.grid.offset));
  full.amplitudes = embed(state, full.grid, Rational(0));
  return long_time_average(full, 0, 1, cache).occupations;
}

RotorState prepare(const GearConfig& config, const KickProtocol& protocol, EigenSystemCache& cache) {
  protocol.validate();
  const DerivedGeometry geom = derive_geometry(config);
  RotorState state = ground_state(geom, cache);
  const int kick = protocol.per_kick();
  for (int i = 0; i < protocol.num_kicks; ++i) {
    if (i > 0 && protocol.delta_t > 0.0) state = evolve(state, protocol.delta_t, cache);
    state = protocol.target_gear == 1 ? apply_kick(state, kick, 0) : apply_kick(state, 0, kick);
  }
  return state;
}

TransmissionResult transmission_ratio(const GearConfig& config, const KickProtocol& protocol,
                                      EigenSystemCache& cache) {
  const RotorState state = prepare(config, protocol, cache);
  return long_time_average(state, protocol.ell, protocol.target_gear, cache);
}

TransmissionResult multi_kick(const GearConfig& config, int ell, double delta_t, EigenSystemCache& cache) {
  return transmission_ratio(config, KickProtocol::quanta(ell, delta_t), cache);
}

std::vector<RotorState> evolve_series(const RotorState& state, const std::vector<double>& t_grid,
                                      EigenSystemCache& cache) {
  require_equal_inertia(state.geom);
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0)) throw std::invalid_argument("time grid must be non-negative");
    if (i > 0 && t_grid[i] < t_grid[i - 1]) throw std::invalid_argument("time grid must be sorted");
  }
  RotorState current = state;
  for (;;) {
    const auto es = cache.get(current.grid, current.geom);
    const Eigen::VectorXcd d0 = es->vectors.transpose() * current.amplitudes;
    std::vector<RotorState> out;
    out.reserve(t_grid.size());
    bool fits = true;
    for (double t : t_grid) {
      Eigen::VectorXcd d = d0;
      for (Eigen::Index i = 0; i < d.size(); ++i) d[i] *= std::polar(1.0, -es->energies[i] * t);
      RotorState s = current;
      s.amplitudes = es->vectors * d;
      s.com_phase = wrap_phase(state.com_phase + com_phase(state.mu_c, t, state.geom));
      if (tail_probability(s.amplitudes) >= kTailTolerance) {
        fits = false;
        break;
      }
      out.push_back(std::move(s));
    }
    if (fits) return out;
    current = grow(current);
  }
}

TimeSeries time_series(const RotorState& state, const std::vector<double>& t_grid, EigenSystemCache& cache) {
  TimeSeries ts;
  ts.t = t_grid;
  for (const auto& s : evolve_series(state, t_grid, cache)) ts.values.push_back(observables(s));
  return ts;
}

double com_phase(const Rational& mu_c, double t, const DerivedGeometry& geom) {
  const double m = to_double(mu_c);
  return wrap_phase(-m * m * t / (2.0 * geom.Ic));
}

bool revival_phase_check(const std::vector<Rational>& mu_c_values, const DerivedGeometry& geom) {
  bool all = true;
  for (const Rational& mu_c : mu_c_values) {
    if (!is_physical_mu_c(mu_c, geom)) throw NonPhysical("mu_c = " + to_string(mu_c) + " is unreachable");
    const double m = to_double(mu_c);
    const double phi = m * m * geom.tau_c / (2.0 * geom.Ic);
    all = all && std::abs(std::polar(1.0, -phi) - cplx{1.0, 0.0}) < 1e-10;
  }
  return all;
}

}  // namespace gears
