#include "gears/lattice_oracle.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/SparseCholesky>

#include "gears/errors.hpp"

namespace gears::oracle {

namespace {

using cplx = std::complex<double>;
constexpr double kBoundaryTolerance = 1e-10;

void check_boundary(const LatticeState& s, const char* when) {
  if (s.boundary_probability() > kBoundaryTolerance)
    throw TruncationBreach(std::string("lattice boundary occupied ") + when);
}

}  // namespace

double LatticeState::boundary_probability() const {
  double p = 0.0;
  for (int a = -cutoff; a <= cutoff; ++a) {
    for (int b = -cutoff; b <= cutoff; ++b) {
      if (std::abs(a) == cutoff || std::abs(b) == cutoff) p += std::norm(amplitudes[index(a, b)]);
    }
  }
  return p;
}

Eigen::SparseMatrix<double> build_full_hamiltonian(const GearConfig& config, int M) {
  const int n1 = config.n1(), n2 = config.n2();
  if (M < n1 + n2) throw std::invalid_argument("lattice cutoff must be at least n1 + n2");
  const int side = 2 * M + 1;
  auto idx = [&](int m1, int m2) { return (m1 + M) * side + (m2 + M); };
  const double V0 = config.V0();

  std::vector<Eigen::Triplet<double>> triplets;
  for (int m1 = -M; m1 <= M; ++m1) {
    for (int m2 = -M; m2 <= M; ++m2) {
      double diag = m1 * m1 / (2.0 * config.I1()) + m2 * m2 / (2.0 * config.I2());
      for (const auto& h : config.potential().harmonics()) {
        if (h.p == 0) {
          diag -= V0 * h.a;
          continue;
        }
        // cos(p (n1 theta1 - n2 theta2)) shifts (m1, m2) by +-(p n1, -p n2).
        const int a = m1 + h.p * n1, b = m2 - h.p * n2;
        if (std::abs(a) <= M && std::abs(b) <= M && V0 * h.a != 0.0) {
          triplets.emplace_back(idx(a, b), idx(m1, m2), -0.5 * V0 * h.a);
          triplets.emplace_back(idx(m1, m2), idx(a, b), -0.5 * V0 * h.a);
        }
      }
      triplets.emplace_back(idx(m1, m2), idx(m1, m2), diag);
    }
  }
  Eigen::SparseMatrix<double> H(side * side, side * side);
  H.setFromTriplets(triplets.begin(), triplets.end());
  return H;
}

namespace {

struct SpectralBounds {
  double lo, hi;
};

SpectralBounds gershgorin(const Eigen::SparseMatrix<double>& H) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(H.rows()), radius = Eigen::VectorXd::Zero(H.rows());
  for (int k = 0; k < H.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(H, k); it; ++it) {
      if (it.row() == it.col())
        diag[it.row()] += it.value();
      else
        radius[it.row()] += std::abs(it.value());
    }
  }
  return {(diag - radius).minCoeff(), (diag + radius).maxCoeff()};
}

}  // namespace

GroundState lattice_ground_state(const GearConfig& config, int M) {
  const Eigen::SparseMatrix<double> H = build_full_hamiltonian(config, M);
  const Eigen::Index dim = H.rows();
  const double shift = gershgorin(H).lo - 1.0;

  Eigen::SparseMatrix<double> shifted = H;
  for (Eigen::Index i = 0; i < dim; ++i) shifted.coeffRef(i, i) -= shift;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("factorisation of the shifted lattice Hamiltonian failed");

  LatticeState s;
  s.cutoff = M;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
  x[s.index(0, 0)] = 1.0;
  double energy = x.dot(H * x);
  for (int it = 0; it < 50000; ++it) {
    x = solver.solve(x);
    x.normalize();
    const Eigen::VectorXd Hx = H * x;
    energy = x.dot(Hx);
    if ((Hx - energy * x).norm() < 1e-13 * (1.0 + std::abs(energy))) {
      Eigen::Index imax;
      x.cwiseAbs().maxCoeff(&imax);
      if (x[imax] < 0) x = -x;
      s.amplitudes = x.cast<cplx>();
      return {s, energy};
    }
  }
  throw ConvergenceFailure("inverse iteration for the lattice ground state did not converge");
}

LatticeState lattice_kick(const LatticeState& state, int l1, int l2) {
  LatticeState out;
  out.cutoff = state.cutoff;
  out.amplitudes = Eigen::VectorXcd::Zero(state.amplitudes.size());
  const int M = state.cutoff;
  double lost = 0.0;
  for (int m1 = -M; m1 <= M; ++m1) {
    for (int m2 = -M; m2 <= M; ++m2) {
      const cplx c = state.amplitudes[state.index(m1, m2)];
      const int a = m1 + l1, b = m2 + l2;
      if (std::abs(a) <= M && std::abs(b) <= M)
        out.amplitudes[out.index(a, b)] = c;
      else
        lost += std::norm(c);
    }
  }
  if (lost > kBoundaryTolerance) throw TruncationBreach("kick pushed probability off the lattice");
  return out;
}

ChebyshevPropagator::ChebyshevPropagator(Eigen::SparseMatrix<double> H) : H_(std::move(H)) {
  const auto [lo, hi] = gershgorin(H_);
  center_ = 0.5 * (hi + lo);
  half_width_ = 0.5 * (hi - lo) * 1.01 + 1e-12;
}

Eigen::VectorXcd ChebyshevPropagator::step(const Eigen::VectorXcd& psi, double t) const {
  // exp(-i H t) = exp(-i c t) [J_0(a t) + 2 sum_k (-i)^k J_k(a t) T_k(H')], H' = (H - c) / a
  const double x = half_width_ * t;
  auto apply = [&](const Eigen::VectorXcd& v) -> Eigen::VectorXcd {
    return (H_ * v - center_ * v) / half_width_;
  };
  Eigen::VectorXcd prev = psi;
  Eigen::VectorXcd curr = apply(psi);
  Eigen::VectorXcd out = std::cyl_bessel_j(0.0, x) * psi;
  cplx phase{0.0, -1.0};
  out += 2.0 * phase * std::cyl_bessel_j(1.0, x) * curr;
  const int min_terms = static_cast<int>(x) + 30;
  for (int k = 2;; ++k) {
    Eigen::VectorXcd next = 2.0 * apply(curr) - prev;
    phase *= cplx{0.0, -1.0};
    const double coeff = std::cyl_bessel_j(static_cast<double>(k), x);
    out += 2.0 * phase * coeff * next;
    prev = std::move(curr);
    curr = std::move(next);
    if (k > min_terms && std::abs(coeff) < 1e-18) break;
  }
  return std::polar(1.0, -center_ * t) * out;
}

Eigen::VectorXcd ChebyshevPropagator::propagate(const Eigen::VectorXcd& psi, double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("propagation time must be non-negative");
  if (t == 0.0) return psi;
  constexpr double max_phase = 40.0;  // a * dt per sub-step
  const auto substeps = static_cast<int>(std::ceil(half_width_ * t / max_phase));
  const double dt = t / substeps;
  Eigen::VectorXcd out = psi;
  for (int i = 0; i < substeps; ++i) out = step(out, dt);
  return out;
}

LatticeObservables measure(const LatticeState& state, const Eigen::SparseMatrix<double>& H) {
  LatticeObservables o;
  const int M = state.cutoff;
  for (int m1 = -M; m1 <= M; ++m1) {
    for (int m2 = -M; m2 <= M; ++m2) {
      const double p = std::norm(state.amplitudes[state.index(m1, m2)]);
      if (p == 0.0) continue;
      o.norm += p;
      o.L1 += p * m1;
      o.L2 += p * m2;
      o.L1_sq += p * m1 * m1;
      o.L2_sq += p * m2 * m2;
      o.gear2[m2] += p;
    }
  }
  o.energy = state.amplitudes.dot(H * state.amplitudes).real();
  o.boundary = state.boundary_probability();
  return o;
}

OracleSeries oracle_run(const GearConfig& config, const KickProtocol& protocol, const std::vector<double>& t_grid,
                        int M) {
  protocol.validate();
  const Eigen::SparseMatrix<double> H = build_full_hamiltonian(config, M);
  const ChebyshevPropagator propagator(H);
  auto [state, E0] = lattice_ground_state(config, M);
  check_boundary(state, "by the ground state");

  const int kick = protocol.per_kick();
  for (int i = 0; i < protocol.num_kicks; ++i) {
    if (i > 0 && protocol.delta_t > 0.0) {
      state.amplitudes = propagator.propagate(state.amplitudes, protocol.delta_t);
      check_boundary(state, "between kicks");
    }
    state = protocol.target_gear == 1 ? lattice_kick(state, kick, 0) : lattice_kick(state, 0, kick);
  }
  check_boundary(state, "after the kicks");

  OracleSeries series;
  series.ground_energy = E0;
  double now = 0.0;
  for (double t : t_grid) {
    if (t < now) throw std::invalid_argument("time grid must be sorted and non-negative");
    state.amplitudes = propagator.propagate(state.amplitudes, t - now);
    now = t;
    auto obs = measure(state, H);
    if (obs.boundary > kBoundaryTolerance) throw TruncationBreach("lattice boundary occupied during evolution");
    series.t.push_back(t);
    series.values.push_back(std::move(obs));
  }
  return series;
}

}  // namespace gears::oracle
