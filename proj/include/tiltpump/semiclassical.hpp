#pragma once

#include "tiltpump/topology.hpp"

#include <cmath>
#include <vector>

namespace tiltpump {

/// Semiclassical transport along the line {(k0, t)}: the displacement
/// splits into a dispersion part Int d(eps)/dk dt (centered difference,
/// h = 1e-4 * 2pi/d) and a geometric part Int F dt.
struct SemiclassicalResult {
  double total_sites = 0.0;
  double dispersion_sites = 0.0;
  double geometric_sites = 0.0;
  double total_cells() const { return total_sites / kCellSize; }
  double dispersion_cells() const { return dispersion_sites / kCellSize; }
  double geometric_cells() const { return geometric_sites / kCellSize; }
};

inline SemiclassicalResult semiclassical_displacement(const ModelParams& p, const BlochSectorBasis& sector, int m,
                                                      double k0, double tau, int Nt) {
  const double dk = 1e-4 * 2.0 * std::numbers::pi / kCellSize;
  auto group_velocity = [&](double t) {
    const double ep = solve_block(detail::build_momentum_block_any_k(p, sector, k0 + dk, t)).energies[m];
    const double em = solve_block(detail::build_momentum_block_any_k(p, sector, k0 - dk, t)).energies[m];
    return (ep - em) / (2.0 * dk);
  };
  std::vector<double> disp(Nt + 1), geom(Nt + 1);
  parallel_for(static_cast<size_t>(Nt + 1), [&](size_t i) {
    const double t = tau * static_cast<double>(i) / Nt;
    disp[i] = group_velocity(t);
    geom[i] = berry_curvature_point(p, sector, m, k0, t);
  });
  SemiclassicalResult res;
  for (int i = 0; i <= Nt; ++i) {
    const double w = (i == 0 || i == Nt) ? 0.5 : 1.0;
    res.dispersion_sites += w * disp[i];
    res.geometric_sites += w * geom[i];
  }
  res.dispersion_sites *= tau / Nt;
  res.geometric_sites *= tau / Nt;
  res.total_sites = res.dispersion_sites + res.geometric_sites;
  return res;
}

}  // namespace tiltpump
