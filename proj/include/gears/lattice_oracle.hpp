#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gears/gear_model.hpp"
#include "gears/protocol.hpp"

// Brute-force reference: the two-rotor Hamiltonian on the truncated (m1, m2)
// lattice, with no centre-of-mass / relative transformation anywhere.
namespace gears::oracle {

/// Amplitudes on (m1, m2) in [-M, M]^2, row-major in m1.
struct LatticeState {
  int cutoff = 0;
  Eigen::VectorXcd amplitudes;

  int side() const { return 2 * cutoff + 1; }
  Eigen::Index index(int m1, int m2) const { return static_cast<Eigen::Index>(m1 + cutoff) * side() + (m2 + cutoff); }
  double boundary_probability() const;
};

Eigen::SparseMatrix<double> build_full_hamiltonian(const GearConfig& config, int M);

/// Lowest eigenpair by shifted inverse iteration.
struct GroundState {
  LatticeState state;
  double energy;
};
GroundState lattice_ground_state(const GearConfig& config, int M);

/// Index shift (m1, m2) -> (m1 + l1, m2 + l2). Throws TruncationBreach if
/// more than 1e-10 of probability would leave the lattice.
LatticeState lattice_kick(const LatticeState& state, int l1, int l2);

/// exp(-i H t) by Chebyshev expansion on the sparse Hamiltonian.
class ChebyshevPropagator {
 public:
  explicit ChebyshevPropagator(Eigen::SparseMatrix<double> H);
  Eigen::VectorXcd propagate(const Eigen::VectorXcd& psi, double t) const;

 private:
  Eigen::VectorXcd step(const Eigen::VectorXcd& psi, double t) const;
  Eigen::SparseMatrix<double> H_;
  double center_ = 0, half_width_ = 1;
};

struct LatticeObservables {
  double L1 = 0, L2 = 0, L1_sq = 0, L2_sq = 0, energy = 0, norm = 0, boundary = 0;
  std::map<std::int64_t, double> gear2;  // reduced distribution of m2
};

LatticeObservables measure(const LatticeState& state, const Eigen::SparseMatrix<double>& H);

struct OracleSeries {
  std::vector<double> t;
  std::vector<LatticeObservables> values;
  double ground_energy = 0;
};

/// Ground state, protocol kicks with delta_t waits, then observables at each
/// t measured from the final kick.
OracleSeries oracle_run(const GearConfig& config, const KickProtocol& protocol, const std::vector<double>& t_grid,
                        int M);

}  // namespace gears::oracle
