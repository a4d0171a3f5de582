#include <catch2/catch.hpp>

#include "tiltpump/basis.hpp"
#include "tiltpump/hamiltonian.hpp"
#include "tiltpump/params.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace tiltpump;

namespace {

// Independent second-quantization oracle: states are occupation configs
// (n_1..n_L) with sum 2, matrix elements from ladder-operator algebra.
struct FockOracle {
  int L;
  std::vector<std::vector<int>> configs;

  explicit FockOracle(int sites) : L(sites) {
    for (int i = 0; i < L; ++i)
      for (int j = i; j < L; ++j) {
        std::vector<int> c(L, 0);
        c[i] += 1;
        c[j] += 1;
        configs.push_back(c);
      }
  }

  int find(const std::vector<int>& c) const {
    for (size_t x = 0; x < configs.size(); ++x)
      if (configs[x] == c) return static_cast<int>(x);
    throw std::logic_error("config not found");
  }

  Eigen::MatrixXcd lab_hamiltonian(const ModelParams& p, double t) const {
    const int D = static_cast<int>(configs.size());
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(D, D);
    const bool periodic = (p.boundary == Boundary::periodic);
    for (int x = 0; x < D; ++x) {
      const auto& c = configs[x];
      double diag = 0.0;
      for (int s = 0; s < L; ++s) {
        const int j = s + 1;
        diag += (p.Delta0 * parity_sign(j) * std::cos(p.phase(t)) + p.omega_F() * j) * c[s];
        diag += 0.5 * p.U * c[s] * (c[s] - 1);
      }
      H(x, x) += diag;
      const int last_bond = periodic ? L : L - 1;
      for (int bond = 1; bond <= last_bond; ++bond) {
        const int s = bond - 1, sn = bond % L;
        const double amp = p.J + p.delta0 * parity_sign(bond) * std::sin(p.phase(t));
        if (c[sn] > 0) {  // a^dag_s a_{s+1}
          auto cc = c;
          const double f = std::sqrt(double(cc[sn]) * (cc[s] + 1));
          cc[sn] -= 1;
          cc[s] += 1;
          H(find(cc), x) += amp * f;
        }
        if (c[s] > 0) {  // a^dag_{s+1} a_s
          auto cc = c;
          const double f = std::sqrt(double(cc[s]) * (cc[sn] + 1));
          cc[s] -= 1;
          cc[sn] += 1;
          H(find(cc), x) += amp * f;
        }
      }
    }
    return H;
  }
};

std::vector<double> sorted_eigs(const Eigen::MatrixXcd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  std::vector<double> e(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return e;
}

}  // namespace

TEST_CASE("basis dimension and bijection") {
  for (int L : {4, 26, 58}) {
    TwoBosonBasis basis(L);
    CHECK(basis.dim() == L * (L + 1) / 2);
    for (int idx = 0; idx < basis.dim(); ++idx) {
      auto [a, b] = basis.pair_of(idx);
      CHECK(basis.index_of(a, b) == idx);
    }
  }
  CHECK(TwoBosonBasis(4).dim() == 10);
  CHECK(TwoBosonBasis(26).dim() == 351);
  CHECK(TwoBosonBasis(58).dim() == 1711);
}

TEST_CASE("basis rejects bad sizes") {
  CHECK_THROWS_AS(TwoBosonBasis(5), std::invalid_argument);
  CHECK_THROWS_AS(TwoBosonBasis(2), std::invalid_argument);
}

TEST_CASE("hopping amplitude parity values") {
  ModelParams p;
  p.J = -1.0;
  p.delta0 = 0.8;
  p.phi0 = 0.0;
  CHECK(hopping_amplitude(p, 2, 0.0) == Approx(-1.0));
  p.phi0 = std::numbers::pi / 2;
  CHECK(hopping_amplitude(p, 2, 0.0) == Approx(-0.2));
  CHECK(hopping_amplitude(p, 1, 0.0) == Approx(-1.8));
  // two-site periodicity is exact, not only approximate
  p.phi0 = 0.3721;
  CHECK(hopping_amplitude(p, 3, 1.7) == hopping_amplitude(p, 5, 1.7));
}

TEST_CASE("onsite energy parity and tilt") {
  ModelParams p;
  p.Delta0 = 2.0;
  p.phi0 = 0.0;
  CHECK(onsite_energy(p, 1, 0.0, false) == Approx(-2.0));
  CHECK(onsite_energy(p, 2, 0.0, false) == Approx(2.0));
  CHECK(onsite_energy(p, 2, 0.0, true) == Approx(2.0 + 2.0 * p.omega_F()));
  CHECK(onsite_energy(p, 4, 0.5, false) == onsite_energy(p, 2, 0.5, false));
}

TEST_CASE("lab hamiltonian diagonal and bosonic enhancement") {
  ModelParams p;
  p.L_t = 6;
  p.boundary = Boundary::open;
  p.tilt_p = 0;
  p.tilt_q = 1;
  TwoBosonBasis basis(p.L_t);
  const double t = 0.0;
  auto H = build_lab_hamiltonian(p, basis, t).to_dense();
  const int j = 3;
  CHECK(std::real(H(basis.index_of(j, j), basis.index_of(j, j))) ==
        Approx(p.U + 2.0 * onsite_energy(p, j, t, false)));
  CHECK(std::abs(H(basis.index_of(j, j + 1), basis.index_of(j, j)) -
                 std::numbers::sqrt2 * hopping_amplitude(p, j, t)) < 1e-14);
}

TEST_CASE("lab hamiltonian matches second-quantization oracle") {
  ModelParams p;
  p.L_t = 6;
  p.U = 30.0;
  p.boundary = Boundary::open;
  TwoBosonBasis basis(p.L_t);
  FockOracle oracle(p.L_t);
  for (double t : {0.0, 137.0}) {
    auto ours = sorted_eigs(build_lab_hamiltonian(p, basis, t).to_dense());
    auto ref = sorted_eigs(oracle.lab_hamiltonian(p, t));
    double worst = 0.0;
    for (size_t i = 0; i < ours.size(); ++i) worst = std::max(worst, std::abs(ours[i] - ref[i]));
    CHECK(worst < 1e-12);
  }
}

TEST_CASE("lab hamiltonian matches oracle on periodic ring") {
  ModelParams p;
  p.L_t = 6;
  p.U = 7.5;
  p.Delta0 = 1.3;
  p.boundary = Boundary::periodic;
  p.tilt_p = 0;
  p.tilt_q = 1;
  TwoBosonBasis basis(p.L_t);
  FockOracle oracle(p.L_t);
  auto ours = sorted_eigs(build_lab_hamiltonian(p, basis, 11.0).to_dense());
  auto ref = sorted_eigs(oracle.lab_hamiltonian(p, 11.0));
  for (size_t i = 0; i < ours.size(); ++i) CHECK(std::abs(ours[i] - ref[i]) < 1e-12);
}

TEST_CASE("rotating frame reduces to lab frame at zero tilt") {
  ModelParams p;
  p.L_t = 8;
  p.tilt_p = 0;
  p.tilt_q = 1;
  p.boundary = Boundary::periodic;
  TwoBosonBasis basis(p.L_t);
  const double t = 42.0;
  auto a = build_rotating_hamiltonian(p, basis, t).to_dense();
  auto b = build_lab_hamiltonian(p, basis, t).to_dense();
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("rotating frame is the gauge transform of the untilted chain") {
  ModelParams p;
  p.L_t = 8;
  p.boundary = Boundary::open;
  p.tilt_p = 10;
  p.tilt_q = 3;
  TwoBosonBasis basis(p.L_t);
  ModelParams p_notilt = p;
  p_notilt.tilt_p = 0;
  p_notilt.tilt_q = 1;
  for (double t : {0.0, 313.0, 1001.5}) {
    auto Hrot = build_rotating_hamiltonian(p, basis, t).to_dense();
    auto Hlab = build_lab_hamiltonian(p_notilt, basis, t).to_dense();
    // U = exp(i sum_j j omega_F t n_j) is diagonal in the pair basis
    Eigen::VectorXcd u(basis.dim());
    for (int idx = 0; idx < basis.dim(); ++idx) {
      auto [a, b] = basis.pair_of(idx);
      u[idx] = std::polar(1.0, p.omega_F() * t * (a + b));
    }
    Eigen::MatrixXcd transformed = u.asDiagonal() * Hlab * u.conjugate().asDiagonal();
    CHECK((Hrot - transformed).cwiseAbs().maxCoeff() < 1e-12);
    auto se_rot = sorted_eigs(Hrot);
    auto se_lab = sorted_eigs(Hlab);
    for (size_t i = 0; i < se_rot.size(); ++i) CHECK(std::abs(se_rot[i] - se_lab[i]) < 1e-10);
  }
}

TEST_CASE("hermiticity is exact at the entry level") {
  ModelParams p;
  p.L_t = 10;
  p.boundary = Boundary::periodic;
  TwoBosonBasis basis(p.L_t);
  CHECK(build_rotating_hamiltonian(p, basis, 17.3).hermiticity_residual() == 0.0);
  CHECK(build_lab_hamiltonian(p, basis, 17.3).hermiticity_residual() == 0.0);
}

TEST_CASE("open boundary omits the wrap bond") {
  ModelParams p;
  p.L_t = 6;
  p.boundary = Boundary::open;
  TwoBosonBasis basis(p.L_t);
  auto H = build_lab_hamiltonian(p, basis, 0.0).to_dense();
  CHECK(std::abs(H(basis.index_of(1, 3), basis.index_of(3, 6))) == 0.0);
  ModelParams pp = p;
  pp.boundary = Boundary::periodic;
  auto Hp = build_lab_hamiltonian(pp, basis, 0.0).to_dense();
  CHECK(std::abs(Hp(basis.index_of(1, 3), basis.index_of(3, 6))) > 0.1);
}

TEST_CASE("params validation") {
  ModelParams p;
  p.L_t = 7;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.L_t = 26;
  p.tilt_p = 4;
  p.tilt_q = 2;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.tilt_p = 0;
  p.tilt_q = 1;
  CHECK_NOTHROW(p.validate());
  TwoBosonBasis small(4);
  ModelParams mismatched;
  mismatched.L_t = 26;
  CHECK_THROWS_AS(build_lab_hamiltonian(mismatched, small, 0.0), std::invalid_argument);
}
