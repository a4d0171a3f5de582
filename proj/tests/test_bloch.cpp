#include <catch2/catch.hpp>

#include "tiltpump/bloch.hpp"
#include "tiltpump/hamiltonian.hpp"
#include "tiltpump/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

using namespace tiltpump;

TEST_CASE("orbit structure: block dimension d(L_t+1)/2") {
  for (int L : {10, 26}) {
    TwoBosonBasis basis(L);
    BlochSectorBasis sector(basis);
    CHECK(sector.block_dim() == L + 1);
    CHECK(sector.block_dim() * sector.cells() == basis.dim());
    // representatives are the lexicographically smallest orbit members
    for (int r = 0; r < sector.block_dim(); ++r) {
      int rep = sector.rep_pair(r);
      int q = rep;
      for (int n = 0; n < sector.cells(); ++n) {
        CHECK(q >= rep);
        q = sector.translate_pair(q);
      }
    }
  }
}

TEST_CASE("partial-orbit lattices are rejected") {
  TwoBosonBasis basis(8);  // L = 4 cells: half-ring pairs close early
  CHECK_THROWS_AS(BlochSectorBasis(basis), std::invalid_argument);
}

TEST_CASE("block spectra tile the full periodic spectrum (L_t = 10)") {
  ModelParams p;
  p.L_t = 10;
  p.boundary = Boundary::periodic;
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  const double t = 321.0;
  std::vector<double> collected;
  for (double k : momentum_grid(sector.cells())) {
    auto es = solve_block(build_momentum_block(p, sector, k, t));
    for (int i = 0; i < es.energies.size(); ++i) collected.push_back(es.energies[i]);
  }
  REQUIRE(static_cast<int>(collected.size()) == basis.dim());
  std::sort(collected.begin(), collected.end());
  auto full = solve_dense(build_rotating_hamiltonian(p, basis, t).to_dense());
  std::vector<double> reference(full.energies.data(), full.energies.data() + full.energies.size());
  std::sort(reference.begin(), reference.end());
  double worst = 0.0;
  for (size_t i = 0; i < collected.size(); ++i) worst = std::max(worst, std::abs(collected[i] - reference[i]));
  CHECK(worst < 1e-10);
}

TEST_CASE("block is Hermitian and periodic in k for continuum momenta") {
  ModelParams p;
  p.L_t = 26;
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  const double k = 0.4217, t = 77.0;
  auto blk = detail::build_momentum_block_any_k(p, sector, k, t);
  CHECK((blk.H - blk.H.adjoint()).cwiseAbs().maxCoeff() < 1e-14);
  const double bz = 2.0 * std::numbers::pi / kCellSize;
  auto blk2 = detail::build_momentum_block_any_k(p, sector, k + bz, t);
  CHECK((blk.H - blk2.H).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("block is periodic in time with period q T_m") {
  ModelParams p;  // omega_F/omega = 10/3
  p.L_t = 10;
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  auto a = build_momentum_block(p, sector, 0.7, 11.0);
  auto b = build_momentum_block(p, sector, 0.7, 11.0 + p.drive_period());
  CHECK((a.H - b.H).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("analytic dH/dk and dH/dt match centered differences") {
  ModelParams p;
  p.L_t = 10;
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  const double k = 0.9, t = 514.0, h = 1e-5;
  auto blk = detail::build_momentum_block_any_k(p, sector, k, t);
  auto kp = detail::build_momentum_block_any_k(p, sector, k + h, t);
  auto km = detail::build_momentum_block_any_k(p, sector, k - h, t);
  CHECK((blk.dHdk - (kp.H - km.H) / (2.0 * h)).cwiseAbs().maxCoeff() < 1e-7);
  auto tp = detail::build_momentum_block_any_k(p, sector, k, t + h);
  auto tm = detail::build_momentum_block_any_k(p, sector, k, t - h);
  CHECK((blk.dHdt - (tp.H - tm.H) / (2.0 * h)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("momentum block rejects open boundaries and out-of-zone momenta") {
  ModelParams p;
  p.L_t = 10;
  TwoBosonBasis basis(p.L_t);
  BlochSectorBasis sector(basis);
  ModelParams open = p;
  open.boundary = Boundary::open;
  CHECK_THROWS_AS(build_momentum_block(open, sector, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_momentum_block(p, sector, -0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_momentum_block(p, sector, 2.0 * std::numbers::pi / kCellSize, 0.0), std::invalid_argument);
}
