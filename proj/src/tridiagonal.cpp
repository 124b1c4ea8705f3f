/**
 * @file tridiagonal.cpp
 */

#include "egdm/tridiagonal.hpp"

#include <cmath>
#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

std::vector<double> solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                                      const std::vector<double>& upper, std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    throw SingularMatrixError("tridiagonal solve: inconsistent sizes");
  std::vector<double> c(n);
  double pivot = diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      pivot = diag[i] - lower[i] * c[i - 1];
      rhs[i] -= lower[i] * rhs[i - 1];
    }
    if (pivot == 0.0 || !std::isfinite(pivot))
      throw SingularMatrixError(fmt::format("tridiagonal solve: zero pivot in row {}", i));
    c[i] = (i + 1 < n) ? upper[i] / pivot : 0.0;
    rhs[i] /= pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

}  // namespace egdm
