#pragma once

#include "tiltpump/bloch.hpp"
#include "tiltpump/hamiltonian.hpp"
#include "tiltpump/parallel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiltpump {

struct EigenSolveError : std::runtime_error {
  EigenSolveError(double k, double t)
      : std::runtime_error("eigensolver failed to converge at (k=" + std::to_string(k) +
                           ", t=" + std::to_string(t) + ")") {}
};

struct DegeneracyError : std::runtime_error {
  double gap;
  DegeneracyError(double k, double t, double g)
      : std::runtime_error("band degenerate at (k=" + std::to_string(k) + ", t=" + std::to_string(t) +
                           "), gap=" + std::to_string(g)),
        gap(g) {}
};

/// Eigenpairs of one Bloch block, ordered for decreasing energy
/// (band 0 is the highest band).
struct BlockEigensystem {
  Eigen::VectorXd energies;   // descending
  Eigen::MatrixXcd vectors;   // column m belongs to energies[m]
};

inline BlockEigensystem solve_block(const MomentumBlock& blk) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blk.H);
  if (es.info() != Eigen::Success) throw EigenSolveError(blk.k, blk.t);
  const int n = static_cast<int>(blk.H.rows());
  BlockEigensystem out;
  out.energies = es.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (int m = 0; m < n; ++m) out.vectors.col(m) = es.eigenvectors().col(n - 1 - m);
  return out;
}

/// Dense eigensystem of a full-space Hermitian operator, descending.
inline BlockEigensystem solve_dense(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw EigenSolveError(0.0, 0.0);
  const int n = static_cast<int>(H.rows());
  BlockEigensystem out;
  out.energies = es.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (int m = 0; m < n; ++m) out.vectors.col(m) = es.eigenvectors().col(n - 1 - m);
  return out;
}

/// Multiparticle Bloch bands sampled on the uniform (k, t) torus grid
/// [0, 2pi/d) x [0, T_tot).
struct BandSet {
  std::vector<double> kgrid;
  std::vector<double> tgrid;
  double T_tot = 0.0;
  int block_dim = 0;
  std::vector<std::vector<Eigen::VectorXd>> energies;   // [ik][it], descending
  std::vector<std::vector<Eigen::MatrixXcd>> vectors;   // empty unless requested
  bool has_vectors() const { return !vectors.empty(); }
};

inline BandSet band_surface(const ModelParams& p, const BlochSectorBasis& sector, int Nk, int Nt, double T_tot,
                            bool store_vectors = false) {
  if (Nk < 3 || Nt < 3) throw std::invalid_argument("band_surface: need Nk, Nt >= 3");
  if (p.boundary != Boundary::periodic) throw std::invalid_argument("band_surface: periodic boundary required");
  BandSet bs;
  bs.T_tot = T_tot;
  bs.block_dim = sector.block_dim();
  bs.kgrid.resize(Nk);
  bs.tgrid.resize(Nt);
  const double bz = 2.0 * std::numbers::pi / kCellSize;
  for (int i = 0; i < Nk; ++i) bs.kgrid[i] = bz * i / Nk;
  for (int j = 0; j < Nt; ++j) bs.tgrid[j] = T_tot * j / Nt;
  bs.energies.assign(Nk, std::vector<Eigen::VectorXd>(Nt));
  if (store_vectors) bs.vectors.assign(Nk, std::vector<Eigen::MatrixXcd>(Nt));
  parallel_for(static_cast<size_t>(Nk) * Nt, [&](size_t idx) {
    const int i = static_cast<int>(idx / Nt), j = static_cast<int>(idx % Nt);
    auto es = solve_block(detail::build_momentum_block_any_k(p, sector, bs.kgrid[i], bs.tgrid[j]));
    bs.energies[i][j] = std::move(es.energies);
    if (store_vectors) bs.vectors[i][j] = std::move(es.vectors);
  });
  return bs;
}

inline BandSet band_surface(const ModelParams& p, int Nk, int Nt, double T_tot, bool store_vectors = false) {
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  return band_surface(p, sector, Nk, Nt, T_tot, store_vectors);
}

/// Partition of the sorted spectrum into isolated clusters: a boundary is
/// placed between adjacent sorted indices whose energy gap stays above
/// `gap_threshold` over the whole sampled grid.
struct ClusterPartition {
  std::vector<std::pair<int, int>> ranges;  // inclusive [lo, hi] in descending band index
  std::vector<double> boundary_gaps;        // min gap above each range except the last
  double min_internal_gap = 0.0;            // smallest gap inside any cluster
};

inline ClusterPartition find_clusters(const BandSet& bs, double gap_threshold = 0.1) {
  const int nb = bs.block_dim;
  std::vector<double> min_gap(nb - 1, std::numeric_limits<double>::max());
  for (const auto& col : bs.energies)
    for (const auto& e : col)
      for (int m = 0; m + 1 < nb; ++m) min_gap[m] = std::min(min_gap[m], e[m] - e[m + 1]);
  ClusterPartition part;
  int lo = 0;
  double internal = std::numeric_limits<double>::max();
  for (int m = 0; m < nb; ++m) {
    if (m == nb - 1 || min_gap[m] > gap_threshold) {
      part.ranges.emplace_back(lo, m);
      if (m < nb - 1) part.boundary_gaps.push_back(min_gap[m]);
      lo = m + 1;
    } else {
      internal = std::min(internal, min_gap[m]);
    }
  }
  part.min_internal_gap = (internal == std::numeric_limits<double>::max()) ? 0.0 : internal;
  return part;
}

/// Mean double occupancy <sum_j n_j(n_j-1)>/2 of a set of bands, averaged
/// over the sampled grid. In the Bloch sector this is the weight carried by
/// doublon orbit representatives.
struct BandCharacter {
  bool bound = false;
  double mean_double_occupancy = 0.0;
};

inline double double_occupancy(const Eigen::VectorXcd& block_vector, const BlochSectorBasis& sector) {
  double w = 0.0;
  for (int r = 0; r < sector.block_dim(); ++r)
    if (sector.basis().is_doublon(sector.rep_pair(r))) w += std::norm(block_vector[r]);
  return w;
}

inline BandCharacter classify_band(const BandSet& bs, const BlochSectorBasis& sector, std::pair<int, int> range) {
  if (!bs.has_vectors()) throw std::invalid_argument("classify_band: band surface was sampled without vectors");
  double acc = 0.0;
  long count = 0;
  for (const auto& col : bs.vectors)
    for (const auto& V : col)
      for (int m = range.first; m <= range.second; ++m) {
        acc += double_occupancy(V.col(m), sector);
        ++count;
      }
  BandCharacter c;
  c.mean_double_occupancy = acc / static_cast<double>(count);
  c.bound = c.mean_double_occupancy > 0.5;
  return c;
}

/// Instantaneous spectra of the open chain over one drive period. The
/// tilt-free instantaneous operator is diagonalized: on an open chain the
/// rotating-frame hopping phases are a pure gauge, so the spectrum is
/// identical and free of the Wannier-Stark skew.
struct ObcSpectrum {
  std::vector<double> tgrid;
  std::vector<Eigen::VectorXd> energies;     // descending, dimension D
  std::vector<Eigen::MatrixXcd> vectors;     // empty unless requested
  bool has_vectors() const { return !vectors.empty(); }
};

inline ObcSpectrum obc_spectrum(const ModelParams& p, int Nt, double T_tot, bool store_vectors = false) {
  if (p.boundary != Boundary::open) throw std::invalid_argument("obc_spectrum: open boundary required");
  ModelParams untilted = p;
  untilted.tilt_p = 0;
  untilted.tilt_q = 1;
  TwoBosonBasis basis(p.L_t);
  ObcSpectrum out;
  out.tgrid.resize(Nt);
  out.energies.resize(Nt);
  if (store_vectors) out.vectors.resize(Nt);
  for (int j = 0; j < Nt; ++j) out.tgrid[j] = T_tot * j / Nt;
  parallel_for(static_cast<size_t>(Nt), [&](size_t j) {
    auto H = build_lab_hamiltonian(untilted, basis, out.tgrid[j]);
    auto es = solve_dense(H.to_dense());
    out.energies[j] = std::move(es.energies);
    if (store_vectors) out.vectors[j] = std::move(es.vectors);
  });
  return out;
}

}  // namespace tiltpump
