#pragma once

#include "tiltpump/params.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

namespace tiltpump {

/// Sparse Hermitian operator in CSR form. Hermiticity is guaranteed by the
/// builder: every off-diagonal insertion also stores the conjugate-transpose
/// entry, and diagonal entries are real.
class SparseHermitianOperator {
 public:
  explicit SparseHermitianOperator(int dim) : dim_(dim) {}

  void add_diagonal(int i, double v) { triplets_.push_back({i, i, Complex(v, 0.0)}); }

  /// Inserts (i,j,v) and (j,i,conj v). Requires i != j.
  void add_off_diagonal(int i, int j, Complex v) {
    if (i == j) throw std::logic_error("add_off_diagonal: diagonal entry");
    triplets_.push_back({i, j, v});
    triplets_.push_back({j, i, std::conj(v)});
  }

  /// Sorts, merges duplicates and freezes the CSR structure.
  void compress() {
    std::sort(triplets_.begin(), triplets_.end(), [](const Entry& a, const Entry& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    row_ptr_.assign(dim_ + 1, 0);
    cols_.clear();
    vals_.clear();
    for (size_t s = 0; s < triplets_.size();) {
      size_t e = s;
      Complex sum = 0;
      while (e < triplets_.size() && triplets_[e].row == triplets_[s].row && triplets_[e].col == triplets_[s].col)
        sum += triplets_[e++].val;
      if (sum != Complex(0.0, 0.0)) {
        cols_.push_back(triplets_[s].col);
        vals_.push_back(sum);
        ++row_ptr_[triplets_[s].row + 1];
      }
      s = e;
    }
    for (int r = 0; r < dim_; ++r) row_ptr_[r + 1] += row_ptr_[r];
    triplets_.clear();
    triplets_.shrink_to_fit();
    compressed_ = true;
  }

  int dim() const { return dim_; }
  int nonzeros() const { return static_cast<int>(vals_.size()); }

  void apply(const Eigen::VectorXcd& x, Eigen::VectorXcd& y) const {
    y.setZero(dim_);
    for (int r = 0; r < dim_; ++r) {
      Complex acc = 0;
      for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) acc += vals_[s] * x[cols_[s]];
      y[r] = acc;
    }
  }

  Eigen::VectorXcd operator*(const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y;
    apply(x, y);
    return y;
  }

  Eigen::MatrixXcd to_dense() const {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (int r = 0; r < dim_; ++r)
      for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) m(r, cols_[s]) += vals_[s];
    return m;
  }

  /// max |H - H^dagger| over entries; zero by construction.
  double hermiticity_residual() const {
    Eigen::MatrixXcd m = to_dense();
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
  }

  /// Gershgorin bound on the spectral radius, used to size propagator steps.
  double norm_estimate() const {
    double best = 0;
    for (int r = 0; r < dim_; ++r) {
      double acc = 0;
      for (int s = row_ptr_[r]; s < row_ptr_[r + 1]; ++s) acc += std::abs(vals_[s]);
      best = std::max(best, acc);
    }
    return best;
  }

 private:
  struct Entry {
    int row, col;
    Complex val;
  };
  int dim_;
  bool compressed_ = false;
  std::vector<Entry> triplets_;
  std::vector<int> row_ptr_;
  std::vector<int> cols_;
  std::vector<Complex> vals_;
};

}  // namespace tiltpump
