#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace tiltpump {

using Complex = std::complex<double>;

enum class Boundary { periodic, open };

/// Physical and drive constants of the driven, tilted two-site superlattice.
///
/// The drive phase phi(t) = phi0 + omega*t is always derived from these
/// constants, never stored per step. The tilt omega_F is the rational
/// multiple (tilt_p/tilt_q)*omega, so the rotating-frame Hamiltonian is
/// exactly periodic with period tilt_q * T_m.
struct ModelParams {
  double J = -1.0;       // tunneling constant
  double delta0 = 0.8;   // tunneling modulation amplitude
  double Delta0 = 2.0;   // on-site modulation amplitude
  double U = 30.0;       // on-site interaction
  double omega = 0.005;  // drive angular frequency, T_m = 2*pi/omega
  int tilt_p = 10;       // omega_F = (tilt_p/tilt_q) * omega
  int tilt_q = 3;
  double phi0 = 0.0;     // initial drive phase
  int L_t = 26;          // number of sites (even, two-site cells)
  Boundary boundary = Boundary::periodic;

  double omega_F() const { return static_cast<double>(tilt_p) / tilt_q * omega; }
  double T_m() const { return 2.0 * std::numbers::pi / omega; }
  double drive_period() const { return tilt_q * T_m(); }  // q*T_m, exact H_rot period
  double phase(double t) const { return phi0 + omega * t; }
  int cells() const { return L_t / 2; }

  void validate() const {
    if (L_t < 4 || L_t % 2 != 0) throw std::invalid_argument("ModelParams: L_t must be even and >= 4");
    if (tilt_q < 1 || tilt_p < 0) throw std::invalid_argument("ModelParams: tilt ratio must be p/q with q >= 1, p >= 0");
    if (tilt_p > 0 && std::gcd(tilt_p, tilt_q) != 1)
      throw std::invalid_argument("ModelParams: tilt_p/tilt_q must be coprime");
    if (U < 0) throw std::invalid_argument("ModelParams: U must be >= 0");
  }
};

inline constexpr int kCellSize = 2;  // sites per cell (d)

/// (-1)^j for 1-based site index j.
inline int parity_sign(int j) { return (j % 2 == 0) ? 1 : -1; }

/// Bond amplitude J + delta0*sin(pi*j + phi(t)) for the bond j -> j+1.
/// Evaluated through the parity identity sin(pi*j + phi) = (-1)^j sin(phi),
/// which keeps two-site periodicity exact at the bit level.
inline double hopping_amplitude(const ModelParams& p, int j, double t) {
  return p.J + p.delta0 * parity_sign(j) * std::sin(p.phase(t));
}

/// On-site energy Delta0*cos(pi*j + phi(t)) (+ omega_F*j when tilted).
inline double onsite_energy(const ModelParams& p, int j, double t, bool include_tilt) {
  double e = p.Delta0 * parity_sign(j) * std::cos(p.phase(t));
  if (include_tilt) e += p.omega_F() * j;
  return e;
}

}  // namespace tiltpump
