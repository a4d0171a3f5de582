#pragma once

#include "tiltpump/bloch.hpp"
#include "tiltpump/parallel.hpp"
#include "tiltpump/spectrum.hpp"

#include <Eigen/Dense>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace tiltpump {

struct GapClosureError : std::runtime_error {
  explicit GapClosureError(const std::string& what) : std::runtime_error(what) {}
};

/// Berry curvature of band m from the sum-over-states form,
///   F_m = 2 Im sum_{m' != m} <u_m|dH/dk|u_m'><u_m'|dH/dt|u_m> / (e_m - e_m')^2,
/// oriented so that (1/d) Int F dt reproduces the transport direction of
/// the real-time dynamics. The sum runs over the full block complement.
inline double berry_curvature_point(const MomentumBlock& blk, const BlockEigensystem& es, int m,
                                    double degeneracy_tol = 1e-8) {
  const int n = static_cast<int>(es.energies.size());
  const Eigen::VectorXcd um = es.vectors.col(m);
  const Eigen::VectorXcd dk_u = blk.dHdk * um;
  const Eigen::VectorXcd dt_u = blk.dHdt * um;
  double f = 0.0;
  for (int mp = 0; mp < n; ++mp) {
    if (mp == m) continue;
    const double de = es.energies[m] - es.energies[mp];
    if (std::abs(de) < degeneracy_tol) throw DegeneracyError(blk.k, blk.t, std::abs(de));
    const Complex a = es.vectors.col(mp).dot(dk_u);  // <u_m'|dHdk|u_m>
    const Complex b = es.vectors.col(mp).dot(dt_u);  // <u_m'|dHdt|u_m>
    f += 2.0 * std::imag(std::conj(a) * b) / (de * de);
  }
  return f;
}

inline double berry_curvature_point(const ModelParams& p, const BlochSectorBasis& sector, int m, double k, double t,
                                    double degeneracy_tol = 1e-8) {
  const MomentumBlock blk = detail::build_momentum_block_any_k(p, sector, k, t);
  return berry_curvature_point(blk, solve_block(blk), m, degeneracy_tol);
}

/// Lattice-gauge (plaquette link) Chern number of the bands in the
/// inclusive descending index range [band_lo, band_hi] on the
/// [0, 2pi/d) x [0, T_tot) torus. Multi-state clusters use determinant
/// links of the subspace overlap matrices.
struct ChernResult {
  int band_lo = 0, band_hi = 0;
  double raw = 0.0;
  int rounded = 0;
  int Nk = 0, Nt = 0;
  double T_tot = 0.0;
  bool converged = false;
};

namespace detail {

/// Plaquette flux sums for several band ranges in one sweep; the per-point
/// eigensolves are shared across the ranges.
inline std::vector<double> fhs_flux_sums(const ModelParams& p, const BlochSectorBasis& sector,
                                         const std::vector<std::pair<int, int>>& ranges, int Nk, int Nt,
                                         double T_tot, double link_floor) {
  const double bz = 2.0 * std::numbers::pi / kCellSize;
  using Col = std::vector<Eigen::MatrixXcd>;  // per it: full eigenvector matrix
  auto column = [&](int i) {
    Col col(Nt);
    parallel_for(static_cast<size_t>(Nt), [&](size_t j) {
      col[j] =
          solve_block(build_momentum_block_any_k(p, sector, bz * i / Nk, T_tot * static_cast<double>(j) / Nt))
              .vectors;
    });
    return col;
  };
  auto link = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, int lo, int nb) {
    const Complex det = (a.middleCols(lo, nb).adjoint() * b.middleCols(lo, nb)).determinant();
    if (std::abs(det) < link_floor)
      throw GapClosureError("chern_number_fhs: overlap collapsed (band crossing through the grid), |det|=" +
                            std::to_string(std::abs(det)));
    return det;
  };
  std::vector<double> sums(ranges.size(), 0.0);
  Col col0 = column(0), cur = col0, nxt;
  for (int i = 0; i < Nk; ++i) {
    nxt = (i + 1 < Nk) ? column(i + 1) : col0;
    for (int j = 0; j < Nt; ++j) {
      const int jn = (j + 1) % Nt;
      for (size_t r = 0; r < ranges.size(); ++r) {
        const int lo = ranges[r].first, nb = ranges[r].second - ranges[r].first + 1;
        const Complex lt = link(cur[j], cur[jn], lo, nb);
        const Complex lk_up = link(cur[jn], nxt[jn], lo, nb);
        const Complex lt_right = link(nxt[j], nxt[jn], lo, nb);
        const Complex lk = link(cur[j], nxt[j], lo, nb);
        // loop ordered k then t, matching the curvature orientation of
        // berry_curvature_point (and the transport direction)
        const double flux = std::arg(lk * lt_right * std::conj(lk_up) * std::conj(lt));
        if (std::abs(flux) > 0.995 * std::numbers::pi)
          throw GapClosureError("chern_number_fhs: plaquette flux at the principal-branch edge; refine the grid");
        sums[r] += flux;
      }
    }
    cur.swap(nxt);
  }
  return sums;
}

inline double fhs_flux_sum(const ModelParams& p, const BlochSectorBasis& sector, int lo, int hi, int Nk, int Nt,
                           double T_tot, double link_floor) {
  return fhs_flux_sums(p, sector, {{lo, hi}}, Nk, Nt, T_tot, link_floor)[0];
}

}  // namespace detail

/// All ranges in one sweep (shared eigensolves), with the same automatic
/// grid refinement as the single-range entry point.
inline std::vector<ChernResult> chern_number_fhs_multi(const ModelParams& p, const BlochSectorBasis& sector,
                                                       const std::vector<std::pair<int, int>>& ranges, int Nk,
                                                       int Nt, double T_tot, double link_floor = 0.1) {
  int nk = Nk, nt = Nt;
  std::vector<double> sums;
  for (int attempt = 0;; ++attempt) {
    try {
      sums = detail::fhs_flux_sums(p, sector, ranges, nk, nt, T_tot, link_floor);
      break;
    } catch (const GapClosureError&) {
      if (attempt >= 3) throw;
      nk *= 2;
      nt *= 2;
    }
  }
  std::vector<ChernResult> out;
  for (size_t r = 0; r < ranges.size(); ++r) {
    ChernResult res;
    res.band_lo = ranges[r].first;
    res.band_hi = ranges[r].second;
    res.T_tot = T_tot;
    res.raw = sums[r] / (2.0 * std::numbers::pi);
    res.rounded = static_cast<int>(std::lround(res.raw));
    res.Nk = nk;
    res.Nt = nt;
    out.push_back(res);
  }
  return out;
}

inline ChernResult chern_number_fhs(const ModelParams& p, const BlochSectorBasis& sector,
                                    std::pair<int, int> band_range, int Nk, int Nt, double T_tot,
                                    bool check_convergence = false, double link_floor = 0.1) {
  ChernResult res;
  res.band_lo = band_range.first;
  res.band_hi = band_range.second;
  res.T_tot = T_tot;
  int nk = Nk, nt = Nt;
  for (int attempt = 0;; ++attempt) {
    try {
      res.raw = detail::fhs_flux_sum(p, sector, band_range.first, band_range.second, nk, nt, T_tot, link_floor) /
                (2.0 * std::numbers::pi);
      break;
    } catch (const GapClosureError&) {
      if (attempt >= 3) throw;
      nk *= 2;
      nt *= 2;  // automatic refinement keeps the admissibility condition
    }
  }
  res.Nk = nk;
  res.Nt = nt;
  res.rounded = static_cast<int>(std::lround(res.raw));
  if (check_convergence) {
    const double refined =
        detail::fhs_flux_sum(p, sector, band_range.first, band_range.second, 2 * nk, 2 * nt, T_tot, link_floor) /
        (2.0 * std::numbers::pi);
    res.converged = (std::lround(refined) == res.rounded);
  }
  return res;
}

/// Reduced Chern number of band m (descending index):
/// (1/d) Int_0^{duration} F_m(k0, t) dt, trapezoid doubling with one
/// Richardson step until successive estimates agree.
inline double reduced_chern(const ModelParams& p, const BlochSectorBasis& sector, int m, double k0, double duration,
                            double tol = 1e-3, int n0 = 384, int max_doublings = 12) {
  std::vector<double> cache;  // values on the current dyadic grid, cache[i] = F(i * T / n)
  auto eval = [&](double t) { return berry_curvature_point(p, sector, m, k0, t); };
  long n = n0;
  cache.resize(n + 1);
  parallel_for(static_cast<size_t>(n + 1), [&](size_t i) { cache[i] = eval(duration * i / n); });
  auto trapezoid_from_cache = [&](long nn) {
    double acc = 0.5 * (cache[0] + cache[nn]);
    for (long i = 1; i < nn; ++i) acc += cache[i];
    return acc * duration / nn;
  };
  double t_prev = trapezoid_from_cache(n);
  double r_prev = t_prev;
  for (int d = 0; d < max_doublings; ++d) {
    std::vector<double> next(2 * n + 1);
    for (long i = 0; i <= n; ++i) next[2 * i] = cache[i];
    parallel_for(static_cast<size_t>(n), [&](size_t i) { next[2 * i + 1] = eval(duration * (2.0 * i + 1.0) / (2 * n)); });
    cache = std::move(next);
    n *= 2;
    const double t_cur = trapezoid_from_cache(n);
    const double r_cur = (4.0 * t_cur - t_prev) / 3.0;
    if (d > 0 && std::abs(r_cur - r_prev) < tol) return r_cur / kCellSize;
    t_prev = t_cur;
    r_prev = r_cur;
  }
  return r_prev / kCellSize;
}

/// Chern number map C_ii(delta0, Delta0) at omega_F = 0; points on the
/// critical lines are rejected and recorded, not fatal to the sweep.
struct PhasePoint {
  double delta0 = 0.0, Delta0 = 0.0;
  double raw = 0.0;
  int C = 0;
  bool ok = false;
  std::string error;
};

inline std::vector<PhasePoint> phase_diagram(const ModelParams& base, const std::vector<double>& delta0s,
                                             const std::vector<double>& Delta0s, int Nk, int Nt, double T_tot,
                                             double critical_margin = 0.05) {
  TwoBosonBasis basis(base.L_t);
  BlochSectorBasis sector(basis);
  std::vector<PhasePoint> out;
  for (double d0 : delta0s)
    for (double D0 : Delta0s) {
      PhasePoint pt;
      pt.delta0 = d0;
      pt.Delta0 = D0;
      if (std::abs(d0) < critical_margin || std::abs(D0) < critical_margin) {
        pt.error = "on a critical line (delta0 = 0 or Delta0 = 0): Chern number undefined";
        out.push_back(pt);
        continue;
      }
      ModelParams p = base;
      p.delta0 = d0;
      p.Delta0 = D0;
      p.tilt_p = 0;
      p.tilt_q = 1;
      try {
        auto res = chern_number_fhs(p, sector, {1, 1}, Nk, Nt, T_tot);
        pt.raw = res.raw;
        pt.C = res.rounded;
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
      out.push_back(pt);
    }
  return out;
}

/// Scan of Delta0 at fixed delta0: lattice-gauge C_ii for omega_F = 0 and
/// reduced Chern of band (ii) at k0 = 0 for each tilt ratio.
struct ScanPoint {
  double Delta0 = 0.0;
  int tilt_p = 0, tilt_q = 1;  // (0, 1) marks the untilted Chern curve
  double value = 0.0;
  bool ok = false;
  std::string error;
};

inline std::vector<ScanPoint> transition_scan(const ModelParams& base, double delta0,
                                              const std::vector<double>& Delta0s,
                                              const std::vector<std::pair<int, int>>& tilts, int Nk, int Nt,
                                              double reduced_tol = 1e-3) {
  TwoBosonBasis basis(base.L_t);
  BlochSectorBasis sector(basis);
  std::vector<ScanPoint> out;
  for (double D0 : Delta0s) {
    if (D0 == 0.0) continue;
    ModelParams p = base;
    p.delta0 = delta0;
    p.Delta0 = D0;
    {
      ScanPoint pt;
      pt.Delta0 = D0;
      ModelParams p0 = p;
      p0.tilt_p = 0;
      p0.tilt_q = 1;
      try {
        pt.value = chern_number_fhs(p0, sector, {1, 1}, Nk, Nt, 3.0 * p0.T_m()).raw;
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
      out.push_back(pt);
    }
    for (auto [tp, tq] : tilts) {
      ScanPoint pt;
      pt.Delta0 = D0;
      pt.tilt_p = tp;
      pt.tilt_q = tq;
      ModelParams pt_params = p;
      pt_params.tilt_p = tp;
      pt_params.tilt_q = tq;
      try {
        pt.value = reduced_chern(pt_params, sector, 1, 0.0, pt_params.drive_period(), reduced_tol);
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
      out.push_back(pt);
    }
  }
  return out;
}

}  // namespace tiltpump
