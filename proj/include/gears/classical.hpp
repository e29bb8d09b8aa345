#pragma once

#include <vector>

#include "gears/dynamics.hpp"
#include "gears/gear_model.hpp"
#include "gears/protocol.hpp"

namespace gears {

/// Classical relative coordinate plus the conserved centre-of-mass momentum.
struct ClassicalState {
  double theta_r = 0;
  double L_r = 0;
  double L_c = 0;
  double time = 0;
};

/// L_r^2 / 2 Ir - V0 u(n theta_r)
double relative_energy(const ClassicalState& s, const DerivedGeometry& geom);

/// One classical RK4 step of theta' = L / Ir, L' = n V0 u'(n theta).
template <typename Scalar>
void rk4_step(Scalar& theta, Scalar& L, Scalar dt, const DerivedGeometry& geom) {
  const Scalar n = geom.n, V0 = geom.V0(), Ir = geom.Ir;
  const auto& u = geom.config.potential();
  auto torque = [&](Scalar th) { return n * V0 * static_cast<Scalar>(u.derivative(static_cast<double>(n * th))); };
  const Scalar k1t = L / Ir, k1l = torque(theta);
  const Scalar k2t = (L + dt / 2 * k1l) / Ir, k2l = torque(theta + dt / 2 * k1t);
  const Scalar k3t = (L + dt / 2 * k2l) / Ir, k3l = torque(theta + dt / 2 * k2t);
  const Scalar k4t = (L + dt * k3l) / Ir, k4l = torque(theta + dt * k3t);
  theta += dt / 6 * (k1t + 2 * k2t + 2 * k3t + k4t);
  L += dt / 6 * (k1l + 2 * k2l + 2 * k3l + k4l);
}

/// Largest stable RK4 step for the steepest part of the potential.
double max_stable_step(const DerivedGeometry& geom);

struct Trajectory {
  std::vector<ClassicalState> samples;
  double max_energy_drift = 0;  // max |E(t) - E(0)| over every step
};

/// Fixed-step RK4 from `initial` to t_final; every record_every-th step is stored.
/// Throws StepTooLarge if dt exceeds the RK4 stability bound.
Trajectory simulate_relative(const ClassicalState& initial, const DerivedGeometry& geom, double t_final, double dt,
                             int record_every = 1);

struct Thresholds {
  double L_r_star;  // sqrt(2 Ir V0)
  double ell_star;  // single kick on gear 1 that reaches L_r_star
};

Thresholds interlock_threshold(const DerivedGeometry& geom);

/// Gears at rest in a potential minimum, then the protocol's kicks. Bounded
/// relative motion averages L_r to zero; rotating motion drifts with the
/// period-averaged L_r.
TransmissionResult classical_transmission(const GearConfig& config, const KickProtocol& protocol);

/// The state classical_transmission reaches after the protocol.
ClassicalState classical_after_protocol(const GearConfig& config, const KickProtocol& protocol);

/// Time average of L_r over `periods` complete oscillations or rotations,
/// integrated from an RK4 trajectory.
struct NumericAverage {
  double L_r_bar;
  double period;
  bool bounded;
};
NumericAverage numeric_relative_average(const ClassicalState& initial, const DerivedGeometry& geom, int periods,
                                        double dt);

/// Does L_r change sign before t_final?
bool turns_back(const ClassicalState& initial, const DerivedGeometry& geom, double t_final, double dt);

/// Bisection on the single-kick strength separating bounded from rotating
/// relative motion.
double locate_threshold_numeric(const DerivedGeometry& geom, double lo, double hi, double tol, double dt);

}  // namespace gears
