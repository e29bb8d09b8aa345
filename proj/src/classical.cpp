#include "gears/classical.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gears/errors.hpp"

namespace gears {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double default_step(const DerivedGeometry& geom) {
  if (geom.omega0 > 0.0) return 1e-3 * kTwoPi / geom.omega0;
  return 1e-3;
}

// Initial (theta, L_r, L_c): rest at the bottom of -V0 u(n theta).
ClassicalState rest_state(const DerivedGeometry& geom) {
  ClassicalState s;
  s.theta_r = geom.config.potential().extrema().x_max / geom.n;
  return s;
}

// Relative energy at the barrier top.
double barrier(const DerivedGeometry& geom) { return -geom.V0() * geom.config.potential().extrema().u_min; }

bool is_bounded(const ClassicalState& s, const DerivedGeometry& geom) {
  if (geom.V0() == 0.0) return s.L_r == 0.0;
  return relative_energy(s, geom) <= barrier(geom);
}

// Period-averaged L_r of a rotating trajectory, by the periodic trapezoid rule
// on x = n theta (spectrally accurate for smooth periodic integrands).
double rotating_average(const ClassicalState& s, const DerivedGeometry& geom, double* period = nullptr) {
  constexpr int samples = 8192;
  const double E = relative_energy(s, geom);
  const auto& u = geom.config.potential();
  double inverse_speed = 0.0;  // integral over one period of dx / |L(x)|
  for (int i = 0; i < samples; ++i) {
    const double x = kTwoPi * i / samples;
    inverse_speed += 1.0 / std::sqrt(2.0 * geom.Ir * (E + geom.V0() * u.value(x)));
  }
  inverse_speed *= kTwoPi / samples;
  if (period) *period = geom.Ir * inverse_speed / geom.n;
  return std::copysign(kTwoPi / inverse_speed, s.L_r);
}

void advance(ClassicalState& s, const DerivedGeometry& geom, double duration) {
  if (duration <= 0.0) return;
  if (geom.V0() == 0.0) {
    s.theta_r += s.L_r / geom.Ir * duration;
    s.time += duration;
    return;
  }
  const auto steps = static_cast<long>(std::ceil(duration / default_step(geom)));
  const double dt = duration / static_cast<double>(steps);
  for (long i = 0; i < steps; ++i) rk4_step(s.theta_r, s.L_r, dt, geom);
  s.time += duration;
}

}  // namespace

double relative_energy(const ClassicalState& s, const DerivedGeometry& geom) {
  return s.L_r * s.L_r / (2.0 * geom.Ir) - geom.V0() * geom.config.potential().value(geom.n * s.theta_r);
}

double max_stable_step(const DerivedGeometry& geom) {
  const double curvature = geom.V0() * geom.config.potential().curvature_bound();
  if (curvature <= 0.0) return std::numeric_limits<double>::infinity();
  const double omega_max = geom.n * std::sqrt(curvature / geom.Ir);
  return 2.0 * std::numbers::sqrt2 / omega_max;
}

Trajectory simulate_relative(const ClassicalState& initial, const DerivedGeometry& geom, double t_final, double dt,
                             int record_every) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (dt > max_stable_step(geom)) throw StepTooLarge("dt exceeds the RK4 stability bound of the pendulum");
  if (record_every < 1) throw std::invalid_argument("record_every must be >= 1");

  Trajectory traj;
  ClassicalState s = initial;
  const double E0 = relative_energy(s, geom);
  traj.samples.push_back(s);
  const auto steps = static_cast<long>(std::ceil((t_final - initial.time) / dt - 1e-9));
  for (long i = 1; i <= steps; ++i) {
    rk4_step(s.theta_r, s.L_r, dt, geom);
    s.time = initial.time + static_cast<double>(i) * dt;
    traj.max_energy_drift = std::max(traj.max_energy_drift, std::abs(relative_energy(s, geom) - E0));
    if (i % record_every == 0 || i == steps) traj.samples.push_back(s);
  }
  return traj;
}

Thresholds interlock_threshold(const DerivedGeometry& geom) { return {geom.L_r_threshold, geom.ell_threshold}; }

ClassicalState classical_after_protocol(const GearConfig& config, const KickProtocol& protocol) {
  protocol.validate();
  const DerivedGeometry geom = derive_geometry(config);
  const double n1 = geom.n1(), n2 = geom.n2(), n = geom.n;
  const double kick = protocol.per_kick();
  double dLc, dLr;
  if (protocol.target_gear == 1) {
    dLc = n2 * geom.Ic / (n * geom.I) * kick;
    dLr = n1 * geom.Ir / (n * config.I1()) * kick;
  } else {
    dLc = n1 * geom.Ic / (n * geom.I) * kick;
    dLr = -n2 * geom.Ir / (n * config.I2()) * kick;
  }
  ClassicalState s = rest_state(geom);
  for (int i = 0; i < protocol.num_kicks; ++i) {
    if (i > 0) advance(s, geom, protocol.delta_t);
    s.L_c += dLc;
    s.L_r += dLr;
  }
  return s;
}

TransmissionResult classical_transmission(const GearConfig& config, const KickProtocol& protocol) {
  const DerivedGeometry geom = derive_geometry(config);
  const ClassicalState s = classical_after_protocol(config, protocol);
  TransmissionResult res;
  res.ell = protocol.ell;
  if (is_bounded(s, geom)) {
    res.L_r_bar = 0.0;
    res.averaging_period = s.L_r == 0.0 ? 0.0 : numeric_relative_average(s, geom, 1, default_step(geom)).period;
  } else {
    res.L_r_bar = rotating_average(s, geom, &res.averaging_period);
  }
  std::tie(res.L1_bar, res.L2_bar) = angular_momentum_split(s.L_c, res.L_r_bar, geom);
  if (protocol.ell != 0) res.r = (protocol.target_gear == 1 ? res.L2_bar : res.L1_bar) / protocol.ell;
  return res;
}

NumericAverage numeric_relative_average(const ClassicalState& initial, const DerivedGeometry& geom, int periods,
                                        double dt) {
  if (periods < 1) throw std::invalid_argument("periods must be >= 1");
  if (dt > max_stable_step(geom)) throw StepTooLarge("dt exceeds the RK4 stability bound of the pendulum");
  NumericAverage out{0.0, 0.0, is_bounded(initial, geom)};
  if (initial.L_r == 0.0) return out;

  // Events: bounded motion returns to theta0 moving in the initial direction;
  // rotating motion advances theta by one potential period 2 pi / n.
  const double theta0 = initial.theta_r;
  const double direction = initial.L_r > 0 ? 1.0 : -1.0;
  const double stride = out.bounded ? 0.0 : kTwoPi / geom.n;

  double theta = initial.theta_r, L = initial.L_r, t = 0.0;
  double integral = 0.0;  // trapezoid of L dt
  int completed = 0;
  int next_level = 1;
  bool left_start = false;
  const double t_cap = 1e7 * dt;
  while (t < t_cap) {
    const double theta_prev = theta, L_prev = L;
    rk4_step(theta, L, dt, geom);
    const double target = theta0 + direction * stride * next_level;
    const double before = direction * (theta_prev - target);
    const double after = direction * (theta - target);
    if (out.bounded && !left_start && direction * L < 0) left_start = true;
    const bool crossed = before < 0.0 && after >= 0.0 && (!out.bounded || left_start);
    if (crossed) {
      const double frac = before / (before - after);
      integral += frac * dt * (L_prev + 0.5 * frac * (L - L_prev));
      t += frac * dt;
      if (++completed == periods) break;
      // Finish the rest of this step.
      integral += (1.0 - frac) * dt * 0.5 * (L_prev + frac * (L - L_prev) + L);
      t += (1.0 - frac) * dt;
      if (out.bounded)
        left_start = false;
      else
        ++next_level;
      continue;
    }
    integral += 0.5 * dt * (L_prev + L);
    t += dt;
  }
  if (completed < periods) throw ConvergenceFailure("classical trajectory did not complete the requested periods");
  out.period = t / periods;
  out.L_r_bar = integral / t;
  return out;
}

bool turns_back(const ClassicalState& initial, const DerivedGeometry& geom, double t_final, double dt) {
  double theta = initial.theta_r, L = initial.L_r;
  const double sign = L >= 0 ? 1.0 : -1.0;
  for (double t = 0.0; t < t_final; t += dt) {
    rk4_step(theta, L, dt, geom);
    if (sign * L <= 0.0) return true;
  }
  return false;
}

double locate_threshold_numeric(const DerivedGeometry& geom, double lo, double hi, double tol, double dt) {
  const double t_final = 200.0 * kTwoPi / std::max(geom.omega0, 1e-12);
  auto bounded_after_kick = [&](double ell) {
    ClassicalState s = rest_state(geom);
    s.L_r = geom.n1() * geom.Ir / (geom.n * geom.config.I1()) * ell;
    return turns_back(s, geom, t_final, dt);
  };
  if (!bounded_after_kick(lo) || bounded_after_kick(hi))
    throw std::invalid_argument("threshold bracket does not straddle the interlocking threshold");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (bounded_after_kick(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace gears
