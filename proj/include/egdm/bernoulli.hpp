#pragma once

/**
 * @file bernoulli.hpp
 * @brief Bernoulli function B(z) = z / (exp(z) - 1) without overflow or cancellation.
 */

#include <cmath>

#include "egdm/dual.hpp"

namespace egdm {

template <class S>
S bernoulli(const S& z) {
  using std::exp;
  using std::expm1;
  const double zv = value_of(z);
  if (std::fabs(zv) < 1e-5) return 1.0 - z * 0.5 + z * z * (1.0 / 12.0);
  if (zv < 0.0) return z / expm1(z);
  // exp(-z) form keeps large positive z finite
  return z * exp(-z) / (-expm1(-z));
}

}  // namespace egdm
