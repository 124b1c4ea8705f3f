/**
 * @file mobility.cpp
 * @brief SI wrappers for the mobility factors and the contact conditions.
 */

#include "egdm/mobility.hpp"

#include <fmt/format.h>

#include "egdm/boundary.hpp"
#include "egdm/gauss_fermi.hpp"

namespace egdm {

MobilityFactors mobility_factors(double n, double grad_phi, double E_F, const PhysicalParameters& p,
                                 double T) {
  validate(p);
  const double sh = sigma_hat_checked(p, T);
  const double n_red = n / p.Nt;
  if (!(n_red > 0.0) || !(n_red < 1.0))
    throw DomainError(fmt::format("density {} outside (0, Nt)", n));
  const double kT = constants::kB * T;
  const auto gf = gauss_fermi_reduced(E_F / kT, sh);
  const double field = std::fabs(grad_phi) / (std::cbrt(p.Nt) * p.sigma);
  return {g0_factor(sh), g1_factor(n_red, sh), g2_factor(field, sh), g3_factor(n_red, gf.dn)};
}

std::pair<double, double> boundary_densities(double grad_phi0, const PhysicalParameters& p,
                                             const FixedConstants& c, double T) {
  const double dphi = image_force_lowering(grad_phi0, c);
  return {gauss_fermi_density(-c.phi1 + dphi, p, T), gauss_fermi_density(-c.phi2, p, T)};
}

std::pair<double, double> boundary_potentials(double V, const FixedConstants& c) {
  // e V expressed in eV is numerically V
  return {0.0, V - (c.phi2 - c.phi1)};
}

}  // namespace egdm
