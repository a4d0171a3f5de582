#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

namespace tiltpump {

/// Canonical indexing of the symmetric two-boson pair states |l1 l2>,
/// 1 <= l1 <= l2 <= L_t, in lexicographic order. Dimension D = L_t(L_t+1)/2.
class TwoBosonBasis {
 public:
  explicit TwoBosonBasis(int L_t) : L_t_(L_t) {
    if (L_t < 4 || L_t % 2 != 0) throw std::invalid_argument("TwoBosonBasis: L_t must be even and >= 4");
    dim_ = L_t * (L_t + 1) / 2;
    pairs_.reserve(dim_);
    index_.assign(static_cast<size_t>(L_t + 1) * (L_t + 1), -1);
    int idx = 0;
    for (int l1 = 1; l1 <= L_t; ++l1)
      for (int l2 = l1; l2 <= L_t; ++l2) {
        pairs_.emplace_back(l1, l2);
        index_[static_cast<size_t>(l1) * (L_t + 1) + l2] = idx++;
      }
  }

  int sites() const { return L_t_; }
  int dim() const { return dim_; }

  int index_of(int l1, int l2) const {
    if (l1 < 1 || l2 < l1 || l2 > L_t_) throw std::out_of_range("TwoBosonBasis: pair out of range");
    return index_[static_cast<size_t>(l1) * (L_t_ + 1) + l2];
  }

  /// Canonical lookup for an unordered pair (sorts the sites first).
  int index_of_unordered(int a, int b) const { return a <= b ? index_of(a, b) : index_of(b, a); }

  std::pair<int, int> pair_of(int idx) const { return pairs_.at(idx); }

  bool is_doublon(int idx) const {
    auto [a, b] = pairs_[idx];
    return a == b;
  }

 private:
  int L_t_;
  int dim_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> index_;
};

inline TwoBosonBasis build_basis(int L_t) { return TwoBosonBasis(L_t); }

}  // namespace tiltpump
