#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace tfe::detail {

/// Square band matrix with kl sub- and ku super-diagonals, factorised in
/// place by Gaussian elimination with partial pivoting. Each row stores the
/// absolute column window [i - kl, i + kl + ku], which leaves room for the
/// fill-in produced by row interchanges.
class BandedLU {
 public:
  BandedLU(std::size_t n, std::size_t kl, std::size_t ku)
      : n_(n), kl_(kl), ku_(ku), width_(2 * kl + ku + 1), a_(n * width_, 0.0), l_(n * kl, 0.0), piv_(n) {}

  std::size_t size() const noexcept { return n_; }

  void clear() {
    std::fill(a_.begin(), a_.end(), 0.0);
    std::fill(l_.begin(), l_.end(), 0.0);
  }

  /// Entry (i, j); j must lie within [i - kl, i + kl + ku].
  double& at(std::size_t i, std::size_t j) { return a_[i * width_ + (j + kl_ - i)]; }

  /// Returns false on a zero pivot.
  bool factorize() {
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t last_row = std::min(n_ - 1, k + kl_);
      const std::size_t last_col = std::min(n_ - 1, k + kl_ + ku_);
      std::size_t p = k;
      double best = std::abs(get(k, k));
      for (std::size_t i = k + 1; i <= last_row; ++i) {
        const double v = std::abs(get(i, k));
        if (v > best) {
          best = v;
          p = i;
        }
      }
      piv_[k] = p;
      if (!(best > 0.0) || !std::isfinite(best)) return false;
      if (p != k) {
        for (std::size_t j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
      }
      const double pivot = get(k, k);
      for (std::size_t i = k + 1; i <= last_row; ++i) {
        const double l = get(i, k) / pivot;
        l_[i * kl_ + (i - k - 1)] = l;
        at(i, k) = 0.0;
        if (l == 0.0) continue;
        for (std::size_t j = k + 1; j <= last_col; ++j) at(i, j) -= l * get(k, j);
      }
    }
    return true;
  }

  /// Solves A x = b in place after factorize().
  void solve(std::span<double> b) const {
    for (std::size_t k = 0; k < n_; ++k) {
      if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
      const std::size_t last_row = std::min(n_ - 1, k + kl_);
      for (std::size_t i = k + 1; i <= last_row; ++i) b[i] -= l_[i * kl_ + (i - k - 1)] * b[k];
    }
    for (std::size_t kk = n_; kk-- > 0;) {
      const std::size_t last_col = std::min(n_ - 1, kk + kl_ + ku_);
      double s = b[kk];
      for (std::size_t j = kk + 1; j <= last_col; ++j) s -= get(kk, j) * b[j];
      b[kk] = s / get(kk, kk);
    }
  }

 private:
  double get(std::size_t i, std::size_t j) const {
    if (j + kl_ < i || j > i + kl_ + ku_) return 0.0;
    return a_[i * width_ + (j + kl_ - i)];
  }

  std::size_t n_;
  std::size_t kl_;
  std::size_t ku_;
  std::size_t width_;
  std::vector<double> a_;
  std::vector<double> l_;
  std::vector<std::size_t> piv_;
};

}  // namespace tfe::detail
