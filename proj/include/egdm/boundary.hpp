#pragma once

/**
 * @file boundary.hpp
 * @brief Contact boundary conditions with image-force barrier lowering.
 */

#include <cmath>
#include <utility>

#include "egdm/dual.hpp"
#include "egdm/mobility.hpp"
#include "egdm/model.hpp"

namespace egdm {

/// e / (4 pi eps) [V m]
inline double image_force_coefficient(const FixedConstants& c) {
  return c.e / (4.0 * constants::pi * c.eps);
}

/**
 * Barrier lowering sqrt(max(-coeff * g, 0)) where g is the field argument in
 * eV/m and coeff = e/(4 pi eps). The max branch has zero derivative; at
 * exactly zero the derivative is taken as zero and the kink is counted.
 */
template <class S>
S image_force_lowering(const S& coeff_times_field, KinkMonitor* kinks = nullptr) {
  using std::sqrt;
  const S arg = -coeff_times_field;
  const double av = value_of(arg);
  if (av <= 0.0) {
    if (kinks) {
      if (av == 0.0) ++kinks->image_force;
      ++kinks->lowering_off;
    }
    return S(0.0);
  }
  return sqrt(arg);
}

/// Image-force lowering [eV] for the field argument grad_phi0 [eV/m].
inline double image_force_lowering(double grad_phi0, const FixedConstants& c) {
  return image_force_lowering<double>(image_force_coefficient(c) * grad_phi0);
}

/// (n(0), n(L)) [m^-3] for the given field argument at x = 0.
std::pair<double, double> boundary_densities(double grad_phi0, const PhysicalParameters& p,
                                             const FixedConstants& c, double T);

/// (phi(0), phi(L)) [eV] for applied voltage V [V].
std::pair<double, double> boundary_potentials(double V, const FixedConstants& c);

}  // namespace egdm
