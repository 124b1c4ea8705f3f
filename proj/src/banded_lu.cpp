/**
 * @file banded_lu.cpp
 */

#include "egdm/banded_lu.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>

#include "egdm/errors.hpp"

namespace egdm {

BandedMatrix::BandedMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), data_(static_cast<std::size_t>(n) * (kl + ku + 1), 0.0) {
  if (n < 1 || kl < 0 || ku < 0) throw DomainError("banded matrix: invalid shape");
}

double& BandedMatrix::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || !in_band(i, j))
    throw DomainError(fmt::format("banded matrix: ({}, {}) outside the band", i, j));
  return data_[index(i, j)];
}

std::vector<double> BandedMatrix::multiply(const std::vector<double>& x) const {
  std::vector<double> y(n_, 0.0);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - kl_); j <= std::min(n_ - 1, i + ku_); ++j) y[i] += data_[index(i, j)] * x[j];
  return y;
}

BandedLU::BandedLU(const BandedMatrix& A)
    : n_(A.n_), kl_(A.kl_), ku_(A.kl_ + A.ku_), width_(2 * A.kl_ + A.ku_ + 1),
      lu_(static_cast<std::size_t>(A.n_) * width_, 0.0), piv_(A.n_) {
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - A.kl_); j <= std::min(n_ - 1, i + A.ku_); ++j) w(i, j) = A(i, j);

  double umax = 0.0, umin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n_; ++k) {
    const int last_row = std::min(n_ - 1, k + kl_);
    const int last_col = std::min(n_ - 1, k + ku_);
    int p = k;
    for (int i = k + 1; i <= last_row; ++i)
      if (std::fabs(w(i, k)) > std::fabs(w(p, k))) p = i;
    piv_[k] = p;
    if (p != k)
      for (int j = k; j <= last_col; ++j) std::swap(w(k, j), w(p, j));
    const double pivot = w(k, k);
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw SingularMatrixError(fmt::format("banded LU: singular pivot in column {}", k));
    umax = std::max(umax, std::fabs(pivot));
    umin = std::min(umin, std::fabs(pivot));
    for (int i = k + 1; i <= last_row; ++i) {
      const double l = w(i, k) / pivot;
      w(i, k) = l;
      if (l == 0.0) continue;
      for (int j = k + 1; j <= last_col; ++j) w(i, j) -= l * w(k, j);
    }
  }
  pivot_ratio_ = umin / umax;
}

void BandedLU::solve_in_place(std::vector<double>& b) const {
  if (static_cast<int>(b.size()) != n_) throw DomainError("banded LU: right-hand side size");
  for (int k = 0; k < n_; ++k) {
    if (piv_[k] != k) std::swap(b[k], b[piv_[k]]);
    const int last_row = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= last_row; ++i) b[i] -= w(i, k) * b[k];
  }
  for (int k = n_ - 1; k >= 0; --k) {
    double s = b[k];
    const int last_col = std::min(n_ - 1, k + ku_);
    for (int j = k + 1; j <= last_col; ++j) s -= w(k, j) * b[j];
    b[k] = s / w(k, k);
  }
}

}  // namespace egdm
