#include "gears/relative_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>

#include "gears/errors.hpp"

namespace gears {

namespace {

// Eigenvalues and eigenvectors of one symmetric block, in the block's own basis.
struct BlockSolution {
  Eigen::VectorXd energies;
  Eigen::MatrixXd vectors;
};

BlockSolution solve_block(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("symmetric eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

// Modified Gram-Schmidt inside every cluster of (numerically) degenerate eigenvalues.
void reorthogonalize_degenerate(const Eigen::VectorXd& energies, Eigen::MatrixXd& vectors) {
  Eigen::Index start = 0;
  while (start < energies.size()) {
    Eigen::Index end = start + 1;
    while (end < energies.size() && energies[end] - energies[end - 1] <= degeneracy_tolerance(energies[end])) ++end;
    for (Eigen::Index a = start; a < end; ++a) {
      for (Eigen::Index b = start; b < a; ++b) vectors.col(a) -= vectors.col(b).dot(vectors.col(a)) * vectors.col(b);
      vectors.col(a).normalize();
    }
    start = end;
  }
}

// First component that is not round-off is made positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  const double threshold = 1e-8 * v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > threshold) {
      if (v[i] < 0) v = -v;
      return;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

int BandedHamiltonian::bandwidth() const {
  int w = 0;
  for (const auto& b : bands) w = std::max(w, b.steps);
  return w;
}

Eigen::MatrixXd BandedHamiltonian::dense() const {
  const Eigen::Index dim = size();
  Eigen::MatrixXd H = diagonal.asDiagonal();
  for (const auto& b : bands) {
    for (Eigen::Index i = 0; i + b.steps < dim; ++i) {
      H(i, i + b.steps) += b.coupling;
      H(i + b.steps, i) += b.coupling;
    }
  }
  return H;
}

BandedHamiltonian build_hamiltonian(const GridSpec& grid, const DerivedGeometry& geom) {
  if (!geom.equal_inertia()) throw UnsupportedInertia("relative Hamiltonian requires I1 == I2");
  const double V0 = geom.V0();
  const auto& potential = geom.config.potential();

  BandedHamiltonian H;
  H.grid = grid;
  H.period = Rational(geom.n);
  const auto dim = static_cast<Eigen::Index>(grid.size());
  H.momenta.reserve(grid.size());
  H.diagonal.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Rational mu = grid.point(static_cast<std::size_t>(i));
    H.momenta.push_back(mu);
    const double m = to_double(mu);
    H.diagonal[i] = m * m / (2.0 * geom.Ir) - V0 * potential.constant();
  }
  if (V0 == 0.0) return H;

  for (const auto& h : potential.harmonics()) {
    if (h.p == 0 || h.a == 0.0) continue;
    const Rational steps = Rational(h.p * geom.n) / grid.spacing;
    if (!is_integer(steps)) throw std::invalid_argument("potential coupling is not commensurate with the grid");
    const auto s = static_cast<int>(steps.numerator());
    if (grid.J < 2 * s) throw std::invalid_argument("grid truncation J too small for the potential bandwidth");
    H.bands.push_back({s, -0.5 * V0 * h.a});
  }
  return H;
}

EigenSystem eigendecompose(const BandedHamiltonian& H) {
  const Eigen::Index dim = H.size();
  const Eigen::MatrixXd dense = H.dense();

  // Partition grid points into Bloch sectors (residue of mu_r modulo n).
  std::map<Rational, std::vector<Eigen::Index>> sectors;
  for (Eigen::Index i = 0; i < dim; ++i) sectors[centered_residue(H.momenta[i], H.period)].push_back(i);

  struct State {
    double energy;
    int block;
    Eigen::Index order;
    Rational k;
    int parity;
    Eigen::VectorXd vector;  // over grid points
  };
  std::vector<State> states;
  states.reserve(static_cast<std::size_t>(dim));
  int block_id = 0;

  for (const auto& [k, idx] : sectors) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd Hs(m, m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index b = 0; b < m; ++b) Hs(a, b) = dense(idx[a], idx[b]);

    const bool self_conjugate = centered_residue(2 * k, H.period) == 0;
    bool mirror_symmetric = self_conjugate;
    for (Eigen::Index a = 0; mirror_symmetric && a < m; ++a)
      mirror_symmetric = H.momenta[idx[a]] == -H.momenta[idx[m - 1 - a]];

    // Columns of `basis` span one symmetry block each.
    std::vector<std::pair<int, Eigen::MatrixXd>> blocks;
    if (mirror_symmetric) {
      const Eigen::Index pairs = m / 2;
      const bool has_zero = (m % 2) == 1;
      Eigen::MatrixXd even = Eigen::MatrixXd::Zero(m, pairs + (has_zero ? 1 : 0));
      Eigen::MatrixXd odd = Eigen::MatrixXd::Zero(m, pairs);
      const double r = std::sqrt(0.5);
      for (Eigen::Index a = 0; a < pairs; ++a) {
        even(a, a) = r;
        even(m - 1 - a, a) = r;
        odd(a, a) = -r;
        odd(m - 1 - a, a) = r;
      }
      if (has_zero) even(pairs, pairs) = 1.0;
      blocks.emplace_back(+1, std::move(even));
      if (pairs > 0) blocks.emplace_back(-1, std::move(odd));
    } else {
      blocks.emplace_back(0, Eigen::MatrixXd::Identity(m, m));
    }

    for (auto& [parity, P] : blocks) {
      auto [E, W] = solve_block(P.transpose() * Hs * P);
      Eigen::MatrixXd V = P * W;
      reorthogonalize_degenerate(E, V);
      for (Eigen::Index c = 0; c < V.cols(); ++c) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(dim);
        for (Eigen::Index a = 0; a < m; ++a) full[idx[a]] = V(a, c);
        fix_sign(full);
        states.push_back({E[c], block_id, c, k, parity, std::move(full)});
      }
      ++block_id;
    }
  }

  std::stable_sort(states.begin(), states.end(), [](const State& a, const State& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.block != b.block) return a.block < b.block;
    return a.order < b.order;
  });

  EigenSystem es;
  es.energies.resize(dim);
  es.vectors.resize(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    auto& s = states[static_cast<std::size_t>(c)];
    es.energies[c] = s.energy;
    es.vectors.col(c) = s.vector;
    es.bloch_k.push_back(s.k);
    es.parity.push_back(s.parity);
    es.block.push_back(s.block);
  }
  return es;
}

// ---------------------------------------------------------------------------
// Band structure

std::vector<Rational> BandStructure::wave_numbers() const {
  std::vector<Rational> ks;
  for (const auto& e : entries)
    if (std::find(ks.begin(), ks.end(), e.k) == ks.end()) ks.push_back(e.k);
  std::sort(ks.begin(), ks.end());
  return ks;
}

std::vector<double> BandStructure::band(int j) const {
  std::vector<double> out;
  for (const auto& e : entries)
    if (e.band == j) out.push_back(e.energy);
  return out;
}

std::vector<Rational> brillouin_zone(const DerivedGeometry& geom) {
  if (!geom.equal_inertia()) throw UnsupportedInertia("Bloch bands require I1 == I2");
  const Rational quantum = 1 / *geom.nu_exact;
  const Rational half = Rational(geom.n, 2);
  const std::int64_t j_max = floor_int(half / quantum);
  const std::int64_t j_min = floor_int(-half / quantum) + 1;
  std::vector<Rational> ks;
  for (std::int64_t j = j_min; j <= j_max; ++j) ks.push_back(quantum * j);
  return ks;
}

double tail_probability(const Eigen::Ref<const Eigen::VectorXcd>& amplitudes) {
  const Eigen::Index dim = amplitudes.size();
  const Eigen::Index edge = std::max<Eigen::Index>(1, (dim + 9) / 10);
  if (2 * edge >= dim) return amplitudes.squaredNorm();
  return amplitudes.head(edge).squaredNorm() + amplitudes.tail(edge).squaredNorm();
}

double tail_probability(const Eigen::Ref<const Eigen::VectorXd>& amplitudes) {
  return tail_probability(Eigen::VectorXcd(amplitudes.cast<std::complex<double>>()));
}

BandStructure band_structure(const DerivedGeometry& geom, int num_bands, int min_J) {
  if (num_bands < 1) throw std::invalid_argument("num_bands must be >= 1");
  BandStructure bs;
  const Rational n(geom.n);
  for (const Rational& k : brillouin_zone(geom)) {
    int J = std::max({min_J, kMinimumJ, num_bands});
    for (;;) {
      const GridSpec sector{k, n, J};
      const EigenSystem es = eigendecompose(build_hamiltonian(sector, geom));
      bool converged = es.size() >= num_bands;
      for (int j = 0; converged && j < num_bands; ++j)
        converged = tail_probability(es.vectors.col(j)) < kTailTolerance;
      if (converged) {
        for (int j = 0; j < num_bands; ++j) bs.entries.push_back({k, j + 1, es.energies[j]});
        break;
      }
      J *= 2;
      if (J > (1 << 16)) throw ConvergenceFailure("band structure truncation did not converge");
    }
  }
  std::stable_sort(bs.entries.begin(), bs.entries.end(),
                   [](const BandEnergy& a, const BandEnergy& b) { return a.band < b.band; });
  return bs;
}

GridSpec full_zone_grid(const DerivedGeometry& geom, const Rational& min_cutoff) {
  if (!geom.equal_inertia()) throw UnsupportedInertia("Bloch bands require I1 == I2");
  const Rational quantum = 1 / *geom.nu_exact;
  std::int64_t J = floor_int(min_cutoff / quantum);
  if (J * quantum < min_cutoff) ++J;
  return GridSpec{Rational(0), quantum, static_cast<int>(std::max<std::int64_t>(J, kMinimumJ))};
}

// ---------------------------------------------------------------------------
// Cache

EigenSystemCache::Key EigenSystemCache::make_key(const GridSpec& grid, const DerivedGeometry& geom) {
  std::vector<std::pair<int, double>> harmonics;
  for (const auto& h : geom.config.potential().harmonics()) harmonics.emplace_back(h.p, h.a);
  return {grid.offset.numerator(), grid.offset.denominator(), grid.spacing.numerator(), grid.spacing.denominator(),
          grid.J, geom.n, geom.Ir, geom.V0(), std::move(harmonics)};
}

std::shared_ptr<const EigenSystem> EigenSystemCache::get(const GridSpec& grid, const DerivedGeometry& geom) {
  const Key key = make_key(grid, geom);
  {
    std::shared_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) return it->second;
  }
  auto es = std::make_shared<const EigenSystem>(eigendecompose(build_hamiltonian(grid, geom)));
  std::unique_lock lock(mutex_);
  return entries_.try_emplace(key, std::move(es)).first->second;
}

std::size_t EigenSystemCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

void EigenSystemCache::clear() {
  std::unique_lock lock(mutex_);
  entries_.clear();
}

EigenSystemCache& default_eigen_cache() {
  static EigenSystemCache cache;
  return cache;
}

}  // namespace gears
