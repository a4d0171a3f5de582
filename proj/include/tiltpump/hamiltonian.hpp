#pragma once

#include "tiltpump/basis.hpp"
#include "tiltpump/params.hpp"
#include "tiltpump/sparse.hpp"

#include <cmath>

namespace tiltpump {

namespace detail {

/// Enumerates every upward hop |l1 l2> -> |l1' l2'| exactly once per
/// unordered connection; the conjugate (downward) entry is supplied by the
/// Hermitian builder. `phase` multiplies the upward amplitude (rotating
/// frame uses e^{+i omega_F t}, lab frame 1).
template <class EmitUp>
void for_each_up_hop(const ModelParams& p, const TwoBosonBasis& basis, EmitUp&& emit) {
  const int L = basis.sites();
  const bool periodic = (p.boundary == Boundary::periodic);
  auto wrap_up = [L](int s) { return s == L ? 1 : s + 1; };
  for (int idx = 0; idx < basis.dim(); ++idx) {
    auto [a, b] = basis.pair_of(idx);
    if (a == b) {
      // one of the two bosons hops up across bond a
      if (a < L || periodic) {
        int tgt = basis.index_of_unordered(wrap_up(a), a);
        emit(tgt, idx, a, std::numbers::sqrt2);
      }
    } else {
      if (a < L || periodic) {
        int na = wrap_up(a);
        double amp = (na == b) ? std::numbers::sqrt2 : 1.0;
        emit(basis.index_of_unordered(na, b), idx, a, amp);
      }
      if (b < L || periodic) {
        int nb = wrap_up(b);
        double amp = (nb == a) ? std::numbers::sqrt2 : 1.0;
        emit(basis.index_of_unordered(a, nb), idx, b, amp);
      }
    }
  }
}

inline SparseHermitianOperator build_hamiltonian(const ModelParams& p, const TwoBosonBasis& basis, double t,
                                                 bool rotating_frame) {
  p.validate();
  if (basis.sites() != p.L_t) throw std::invalid_argument("build_hamiltonian: basis does not match params.L_t");
  SparseHermitianOperator H(basis.dim());
  const bool tilt_on_diagonal = !rotating_frame;
  for (int idx = 0; idx < basis.dim(); ++idx) {
    auto [a, b] = basis.pair_of(idx);
    double diag = onsite_energy(p, a, t, tilt_on_diagonal) + onsite_energy(p, b, t, tilt_on_diagonal);
    if (a == b) diag += p.U;
    H.add_diagonal(idx, diag);
  }
  const Complex up_phase =
      rotating_frame ? std::polar(1.0, p.omega_F() * t) : Complex(1.0, 0.0);
  for_each_up_hop(p, basis, [&](int tgt, int src, int bond, double amp) {
    H.add_off_diagonal(tgt, src, amp * hopping_amplitude(p, bond, t) * up_phase);
  });
  H.compress();
  return H;
}

}  // namespace detail

/// Two-boson Hamiltonian of the driven tilted superlattice at time t:
/// parity-modulated hoppings, staggered on-site drive, interaction U on
/// doubly occupied sites, linear tilt omega_F * j.
inline SparseHermitianOperator build_lab_hamiltonian(const ModelParams& p, const TwoBosonBasis& basis, double t) {
  return detail::build_hamiltonian(p, basis, t, /*rotating_frame=*/false);
}

/// Rotating-frame version: the tilt is traded for hopping phases
/// e^{-i omega_F t} (downward) / e^{+i omega_F t} (upward); no linear
/// potential on the diagonal.
inline SparseHermitianOperator build_rotating_hamiltonian(const ModelParams& p, const TwoBosonBasis& basis, double t) {
  return detail::build_hamiltonian(p, basis, t, /*rotating_frame=*/true);
}

}  // namespace tiltpump
