#pragma once

/**
 * @file banded_lu.hpp
 * @brief Banded matrix storage and LU factorisation with partial pivoting.
 */

#include <vector>

namespace egdm {

/// Square matrix with kl sub- and ku super-diagonals, row-major band storage.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  int size() const noexcept { return n_; }
  int lower() const noexcept { return kl_; }
  int upper() const noexcept { return ku_; }
  bool in_band(int i, int j) const noexcept { return j - i >= -kl_ && j - i <= ku_; }
  double operator()(int i, int j) const { return in_band(i, j) ? data_[index(i, j)] : 0.0; }
  double& at(int i, int j);  ///< throws DomainError outside the band
  std::vector<double> multiply(const std::vector<double>& x) const;

 private:
  friend class BandedLU;
  int index(int i, int j) const noexcept { return i * (kl_ + ku_ + 1) + (j - i + kl_); }
  int n_, kl_, ku_;
  std::vector<double> data_;
};

/**
 * PA = LU with row interchanges; U has kl + ku super-diagonals. Factor once,
 * then solve any number of right-hand sides.
 */
class BandedLU {
 public:
  explicit BandedLU(const BandedMatrix& A);  ///< throws SingularMatrixError

  int size() const noexcept { return n_; }
  void solve_in_place(std::vector<double>& b) const;
  std::vector<double> solve(std::vector<double> b) const {
    solve_in_place(b);
    return b;
  }
  /// min |U_kk| / max |U_kk|, a cheap conditioning hint.
  double pivot_ratio() const noexcept { return pivot_ratio_; }

 private:
  double& w(int i, int j) { return lu_[i * width_ + (j - i + kl_)]; }
  double w(int i, int j) const { return lu_[i * width_ + (j - i + kl_)]; }
  int n_, kl_, ku_, width_;
  std::vector<double> lu_;
  std::vector<int> piv_;
  double pivot_ratio_ = 0.0;
};

}  // namespace egdm
