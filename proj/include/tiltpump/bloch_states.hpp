#pragma once

#include "tiltpump/bloch.hpp"
#include "tiltpump/spectrum.hpp"
#include "tiltpump/states.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>

namespace tiltpump {

namespace detail {

inline StateVector expand_block_vector(const BlochSectorBasis& sector, const Eigen::VectorXcd& coeffs, double k0,
                                       bool fix_phase) {
  const TwoBosonBasis& basis = sector.basis();
  const int L = sector.cells();
  StateVector psi = StateVector::Zero(basis.dim());
  const double inv_sqrtL = 1.0 / std::sqrt(static_cast<double>(L));
  for (int r = 0; r < sector.block_dim(); ++r) {
    if (coeffs[r] == Complex(0.0, 0.0)) continue;
    int pair = sector.rep_pair(r);
    for (int n = 0; n < L; ++n) {
      psi[pair] += coeffs[r] * std::polar(inv_sqrtL, k0 * kCellSize * sector.shift_of(pair));
      pair = sector.translate_pair(pair);
    }
  }
  psi.normalize();
  if (fix_phase) {
    // lowest index within rounding of the maximal modulus: Bloch states on
    // a ring carry L equal-magnitude maxima, so the argmax alone would be
    // an unstable anchor for the global phase
    double best = 0.0;
    for (int i = 0; i < psi.size(); ++i) best = std::max(best, std::norm(psi[i]));
    int anchor = 0;
    for (int i = 0; i < psi.size(); ++i)
      if (std::norm(psi[i]) >= best * (1.0 - 1e-9)) {
        anchor = i;
        break;
      }
    const Complex ph = psi[anchor] / std::abs(psi[anchor]);
    psi *= std::conj(ph);
  }
  return psi;
}

}  // namespace detail

/// Real-space expansion of a momentum-sector eigenvector: each orbit
/// representative is spread over its translation images with phases
/// e^{+i k d n}. The global phase is fixed by making the largest-magnitude
/// amplitude real positive.
inline StateVector bloch_state_realspace(const ModelParams& p, const BlochSectorBasis& sector, int m, double k0,
                                         double t0, double degeneracy_tol = 1e-8) {
  const MomentumBlock blk = detail::build_momentum_block_any_k(p, sector, k0, t0);
  const BlockEigensystem es = solve_block(blk);
  const int n = static_cast<int>(es.energies.size());
  for (int mp = 0; mp < n; ++mp)
    if (mp != m && std::abs(es.energies[m] - es.energies[mp]) < degeneracy_tol)
      throw DegeneracyError(k0, t0, std::abs(es.energies[m] - es.energies[mp]));
  return detail::expand_block_vector(sector, es.vectors.col(m), k0, /*fix_phase=*/true);
}

/// Gaussian envelope on top of a Bloch state; boundary_tail reports the
/// density weight left on the outer two cells after renormalization, so
/// callers can warn when the packet sits too close to an open edge.
struct GaussianPacket {
  StateVector state;
  double boundary_tail = 0.0;
};

inline GaussianPacket prepare_gaussian(const TwoBosonBasis& basis, const StateVector& bloch, double sigma,
                                       double l0) {
  if (sigma <= 0.0) throw std::invalid_argument("prepare_gaussian: sigma must be positive");
  GaussianPacket packet;
  packet.state = StateVector::Zero(basis.dim());
  for (int idx = 0; idx < basis.dim(); ++idx) {
    auto [a, b] = basis.pair_of(idx);
    const double da = a - l0, db = b - l0;
    packet.state[idx] = bloch[idx] * std::exp(-(da * da + db * db) / (4.0 * sigma * sigma));
  }
  const double nrm = packet.state.norm();
  if (nrm == 0.0) throw std::invalid_argument("prepare_gaussian: envelope annihilated the state");
  packet.state /= nrm;
  const EdgeMetric em = edge_metric(packet.state, basis);
  packet.boundary_tail = em.left_weight + em.right_weight;
  return packet;
}

/// Projection weight of a state onto the bands [range.first, range.second]
/// (descending indices) of the instantaneous periodic spectrum at t0.
inline double band_fidelity(const StateVector& state, const ModelParams& p, const BlochSectorBasis& sector,
                            std::pair<int, int> range, double t0) {
  const int L = sector.cells();
  double fidelity = 0.0;
  for (int n = 0; n < L; ++n) {
    const double k = 2.0 * std::numbers::pi * n / (kCellSize * L);
    const BlockEigensystem es = solve_block(detail::build_momentum_block_any_k(p, sector, k, t0));
    for (int m = range.first; m <= range.second; ++m) {
      const StateVector bloch = detail::expand_block_vector(sector, es.vectors.col(m), k, /*fix_phase=*/false);
      fidelity += std::norm(bloch.dot(state));
    }
  }
  return fidelity;
}

inline double band_fidelity(const StateVector& state, const ModelParams& p, const BlochSectorBasis& sector, int m,
                            double t0) {
  return band_fidelity(state, p, sector, {m, m}, t0);
}

}  // namespace tiltpump
