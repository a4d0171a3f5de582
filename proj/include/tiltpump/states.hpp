#pragma once

#include "tiltpump/basis.hpp"
#include "tiltpump/params.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace tiltpump {

using StateVector = Eigen::VectorXcd;

inline StateVector prepare_fock(const TwoBosonBasis& basis, int l1, int l2) {
  if (l1 < 1 || l1 > l2 || l2 > basis.sites()) throw std::out_of_range("prepare_fock: sites out of range");
  StateVector psi = StateVector::Zero(basis.dim());
  psi[basis.index_of(l1, l2)] = 1.0;
  return psi;
}

/// Particle density n_j, sum_j n_j = 2.
inline Eigen::VectorXd density(const TwoBosonBasis& basis, const StateVector& psi) {
  Eigen::VectorXd n = Eigen::VectorXd::Zero(basis.sites());
  for (int idx = 0; idx < basis.dim(); ++idx) {
    const double w = std::norm(psi[idx]);
    if (w == 0.0) continue;
    auto [a, b] = basis.pair_of(idx);
    n[a - 1] += w;
    n[b - 1] += w;
  }
  return n;
}

/// Center of mass X = sum (l1+l2)/2 |psi|^2, in site units.
inline double centroid(const TwoBosonBasis& basis, const StateVector& psi) {
  double x = 0.0;
  for (int idx = 0; idx < basis.dim(); ++idx) {
    const double w = std::norm(psi[idx]);
    if (w == 0.0) continue;
    auto [a, b] = basis.pair_of(idx);
    x += 0.5 * (a + b) * w;
  }
  return x;
}

/// Two-boson correlation R_ij = <a_i^dag a_j^dag a_j a_i>; symmetric,
/// sums to N(N-1) = 2.
inline Eigen::MatrixXd correlation(const TwoBosonBasis& basis, const StateVector& psi) {
  const int L = basis.sites();
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(L, L);
  for (int idx = 0; idx < basis.dim(); ++idx) {
    const double w = std::norm(psi[idx]);
    if (w == 0.0) continue;
    auto [a, b] = basis.pair_of(idx);
    if (a == b) {
      R(a - 1, a - 1) += 2.0 * w;
    } else {
      R(a - 1, b - 1) += w;
      R(b - 1, a - 1) += w;
    }
  }
  return R;
}

/// Probability weight of the particle density on the outermost cells of an
/// open chain; a state is called an edge state when either side carries
/// more than half of the density.
struct EdgeMetric {
  double left_weight = 0.0;
  double right_weight = 0.0;
  bool edge() const { return left_weight > 0.5 || right_weight > 0.5; }
};

inline EdgeMetric edge_metric(const StateVector& state, const TwoBosonBasis& basis, int edge_cells = 2) {
  const int L = basis.sites();
  const int span = edge_cells * kCellSize;
  EdgeMetric em;
  for (int idx = 0; idx < basis.dim(); ++idx) {
    const double w = std::norm(state[idx]);
    if (w == 0.0) continue;
    auto [a, b] = basis.pair_of(idx);
    for (int site : {a, b}) {
      if (site <= span) em.left_weight += 0.5 * w;
      if (site > L - span) em.right_weight += 0.5 * w;
    }
  }
  return em;
}

/// Density in center-of-mass quasimomentum space. Amplitudes are regrouped
/// by relative separation r and transformed with the COM phase
/// e^{-i K (l1+l2)/2}; K folds into the physical zone [0, 2pi/d). The mean
/// momentum is a circular (phasor) mean, so zone wrapping is harmless.
struct MomentumDensity {
  std::vector<double> K;    // folded grid in [0, 2pi/d)
  std::vector<double> rho;  // normalized to sum 1
  double mean_K = 0.0;
};

inline MomentumDensity momentum_density(const TwoBosonBasis& basis, const StateVector& psi) {
  const int L = basis.sites();
  const int nfold = L / kCellSize;  // folded COM grid size
  MomentumDensity md;
  md.K.resize(nfold);
  md.rho.assign(nfold, 0.0);
  const double bz = 2.0 * std::numbers::pi / kCellSize;
  for (int n = 0; n < nfold; ++n) md.K[n] = bz * n / nfold;
  for (int r = 0; r < L; ++r) {  // relative separation
    for (int n = 0; n < L; ++n) {
      const double Kn = 2.0 * std::numbers::pi * n / L;
      std::complex<double> amp = 0.0;
      for (int l1 = 1; l1 + r <= L; ++l1) {
        const std::complex<double> c = psi[basis.index_of(l1, l1 + r)];
        if (c != std::complex<double>(0.0, 0.0)) amp += std::polar(1.0, -Kn * (l1 + 0.5 * r)) * c;
      }
      md.rho[n % nfold] += std::norm(amp) / L;
    }
  }
  double total = 0.0;
  for (double v : md.rho) total += v;
  std::complex<double> phasor = 0.0;
  for (int n = 0; n < nfold; ++n) {
    md.rho[n] /= total;
    phasor += md.rho[n] * std::polar(1.0, md.K[n] * kCellSize);
  }
  double arg = std::arg(phasor) / kCellSize;  // in (-pi/d, pi/d]
  if (arg < 0.0) arg += bz;
  md.mean_K = arg;
  return md;
}

}  // namespace tiltpump
