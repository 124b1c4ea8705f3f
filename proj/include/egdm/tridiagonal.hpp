#pragma once

/**
 * @file tridiagonal.hpp
 * @brief Thomas algorithm for tridiagonal systems.
 */

#include <vector>

namespace egdm {

/**
 * Solves lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i].
 * lower[0] and upper[n-1] are ignored. No pivoting: intended for the
 * diagonally dominant (by rows or columns) systems of this project.
 * Throws SingularMatrixError on a zero or non-finite pivot.
 */
std::vector<double> solve_tridiagonal(const std::vector<double>& lower, const std::vector<double>& diag,
                                      const std::vector<double>& upper, std::vector<double> rhs);

}  // namespace egdm
