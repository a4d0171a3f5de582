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

/// Cotranslational reduction of the two-boson space: translation orbits of
/// the pair states under the shift of both particles by one cell (d = 2
/// sites). Requires every orbit to have the full length L = L_t/2, which
/// holds exactly when L is odd (L_t = 2 mod 4); pairs separated by half the
/// ring would otherwise form short orbits and are rejected here.
class BlochSectorBasis {
 public:
  explicit BlochSectorBasis(const TwoBosonBasis& basis) : basis_(&basis), cells_(basis.sites() / 2) {
    if (cells_ % 2 == 0)
      throw std::invalid_argument(
          "BlochSectorBasis: L_t = 0 mod 4 has partial translation orbits; use L_t = 2 mod 4");
    const int D = basis.dim();
    orbit_of_.assign(D, -1);
    shift_of_.assign(D, 0);
    for (int p = 0; p < D; ++p) {
      if (orbit_of_[p] >= 0) continue;
      const int r = static_cast<int>(reps_.size());
      reps_.push_back(p);
      int q = p;
      for (int n = 0; n < cells_; ++n) {
        if (n > 0 && q == p) throw std::logic_error("BlochSectorBasis: short orbit");
        orbit_of_[q] = r;
        shift_of_[q] = n;
        q = translate_pair(q);
      }
      if (q != p) throw std::logic_error("BlochSectorBasis: orbit does not close");
    }
  }

  const TwoBosonBasis& basis() const { return *basis_; }
  int cells() const { return cells_; }
  int block_dim() const { return static_cast<int>(reps_.size()); }
  int rep_pair(int r) const { return reps_[r]; }
  int orbit_of(int pair_index) const { return orbit_of_[pair_index]; }
  int shift_of(int pair_index) const { return shift_of_[pair_index]; }

  /// Signed minimal-branch cell shift in (-L/2, L/2); unique for odd L.
  int signed_shift_of(int pair_index) const {
    int n = shift_of_[pair_index];
    return (2 * n > cells_) ? n - cells_ : n;
  }

  /// Shift both particles up by one cell, canonical order restored.
  int translate_pair(int pair_index) const {
    auto [a, b] = basis_->pair_of(pair_index);
    const int L = basis_->sites();
    int a2 = a + kCellSize, b2 = b + kCellSize;
    if (a2 > L) a2 -= L;
    if (b2 > L) b2 -= L;
    return basis_->index_of_unordered(a2, b2);
  }

 private:
  const TwoBosonBasis* basis_;
  int cells_;
  std::vector<int> reps_;
  std::vector<int> orbit_of_;
  std::vector<int> shift_of_;
};

/// Dense Bloch block H(k, t) of the rotating-frame Hamiltonian for the
/// center-of-mass quasimomentum k, with analytic derivative matrices.
struct MomentumBlock {
  double k = 0.0;
  double t = 0.0;
  Eigen::MatrixXcd H;
  Eigen::MatrixXcd dHdk;
  Eigen::MatrixXcd dHdt;
};

namespace detail {

/// Builds a block for any real k (the matrix elements carry phases
/// e^{-i k d n} with the minimal signed branch of the cell shift n, which
/// keeps H Hermitian and exactly 2 pi / d periodic for all real k).
inline MomentumBlock build_momentum_block_any_k(const ModelParams& p, const BlochSectorBasis& sector, double k,
                                                double t) {
  p.validate();
  const TwoBosonBasis& basis = sector.basis();
  if (basis.sites() != p.L_t) throw std::invalid_argument("build_momentum_block: basis does not match params.L_t");
  const int Dk = sector.block_dim();
  const int L = basis.sites();
  const double wF = p.omega_F();
  const double phi = p.phase(t);
  const double sin_phi = std::sin(phi), cos_phi = std::cos(phi);

  MomentumBlock blk;
  blk.k = k;
  blk.t = t;
  blk.H = Eigen::MatrixXcd::Zero(Dk, Dk);
  blk.dHdk = Eigen::MatrixXcd::Zero(Dk, Dk);
  blk.dHdt = Eigen::MatrixXcd::Zero(Dk, Dk);

  const Complex up = std::polar(1.0, wF * t);      // phase on upward hops
  const Complex down = std::conj(up);

  auto scatter = [&](int r_src, int pair_tgt, Complex val, Complex dval_dt) {
    const int r_tgt = sector.orbit_of(pair_tgt);
    int n = sector.shift_of(pair_tgt);
    if (2 * n > sector.cells()) n -= sector.cells();
    const Complex phase = std::polar(1.0, -k * kCellSize * n);
    blk.H(r_tgt, r_src) += val * phase;
    blk.dHdk(r_tgt, r_src) += val * Complex(0.0, -kCellSize * n) * phase;
    blk.dHdt(r_tgt, r_src) += dval_dt * phase;
  };

  auto wrap_up = [L](int s) { return s == L ? 1 : s + 1; };
  auto wrap_down = [L](int s) { return s == 1 ? L : s - 1; };

  for (int r = 0; r < Dk; ++r) {
    auto [a, b] = basis.pair_of(sector.rep_pair(r));
    // diagonal: staggered on-site drive (+ U for doublons); no tilt in this frame
    {
      double stagger = parity_sign(a) + parity_sign(b);
      double val = p.Delta0 * stagger * cos_phi + (a == b ? p.U : 0.0);
      double dval = -p.Delta0 * stagger * p.omega * sin_phi;
      scatter(r, sector.rep_pair(r), val, dval);
    }
    // hops; bond j has amplitude f_j(t) = J + delta0*(-1)^j sin(phi)
    auto hop = [&](int site, int other, bool upward) {
      const int bond = upward ? site : wrap_down(site);
      const int tgt_site = upward ? wrap_up(site) : wrap_down(site);
      const double f = hopping_amplitude(p, bond, t);
      const double fdot = p.delta0 * parity_sign(bond) * p.omega * cos_phi;
      const double amp = (site == other || tgt_site == other) ? std::numbers::sqrt2 : 1.0;
      const Complex ph = upward ? up : down;
      const Complex dph = ph * Complex(0.0, upward ? wF : -wF);
      scatter(r, basis.index_of_unordered(tgt_site, other), amp * f * ph, amp * (fdot * ph + f * dph));
    };
    if (a == b) {
      hop(a, a, true);
      hop(a, a, false);
    } else {
      hop(a, b, true);
      hop(a, b, false);
      hop(b, a, true);
      hop(b, a, false);
    }
  }

  // construction is Hermitian up to roundoff in the trig evaluations;
  // symmetrize exactly and keep the residual observable for tests
  auto hermitize = [](Eigen::MatrixXcd& m) { m = 0.5 * (m + m.adjoint()).eval(); };
  hermitize(blk.H);
  hermitize(blk.dHdk);
  hermitize(blk.dHdt);
  return blk;
}

}  // namespace detail

/// Bloch block of the rotating-frame Hamiltonian, k in [0, 2 pi / d).
inline MomentumBlock build_momentum_block(const ModelParams& p, const BlochSectorBasis& sector, double k, double t) {
  if (p.boundary != Boundary::periodic)
    throw std::invalid_argument("build_momentum_block: requires periodic boundary");
  const double bz = 2.0 * std::numbers::pi / kCellSize;
  if (!(k >= 0.0 && k < bz)) throw std::invalid_argument("build_momentum_block: k outside [0, 2pi/d)");
  return detail::build_momentum_block_any_k(p, sector, k, t);
}

/// Convenience overload building its own sector tables.
inline MomentumBlock build_momentum_block(const ModelParams& p, const TwoBosonBasis& basis, double k, double t) {
  BlochSectorBasis sector(basis);
  return build_momentum_block(p, sector, k, t);
}

/// Commensurate momentum grid k_n = 2 pi n / (d L), n = 0..L-1.
inline std::vector<double> momentum_grid(int cells) {
  std::vector<double> ks(cells);
  for (int n = 0; n < cells; ++n) ks[n] = 2.0 * std::numbers::pi * n / (kCellSize * cells);
  return ks;
}

}  // namespace tiltpump
