/**
 * @file discretization.cpp
 * @brief SI entry points of the Scharfetter-Gummel scheme.
 */

#include "egdm/discretization.hpp"

#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

double sg_flux(double n_i, double n_ip1, double phi_i, double phi_ip1, double g1_avg,
               double g2_avg, double g3_avg, const PhysicalParameters& p, double T, double h) {
  if (!(h > 0.0)) throw DomainError("mesh width must be positive");
  if (!(g3_avg > 0.0)) throw DomainError("averaged g3 must be positive");
  const double kT = constants::kB * T;
  const double g0 = g0_factor(p.sigma / kT);
  const double z = (phi_ip1 - phi_i) / (kT * g3_avg);
  const double pref = constants::e * p.mu0 * g0 * g1_avg * g2_avg * kT * g3_avg / h;
  return pref * (bernoulli(-z) * n_i - bernoulli(z) * n_ip1);
}

AveragedFactors average_factors(const std::vector<double>& n, const std::vector<double>& phi,
                                const std::vector<double>& E_F, const PhysicalParameters& p,
                                double T, double h, UpwindMode mode) {
  if (n.size() != phi.size() || n.size() != E_F.size() || n.size() < 2)
    throw DomainError("average_factors: node vectors must have equal length >= 2");
  const double kT = constants::kB * T;
  const double sh = sigma_hat_checked(p, T);
  const std::size_t M = n.size();
  std::vector<double> g1(M), g3(M);
  for (std::size_t i = 0; i < M; ++i) {
    const double nr = n[i] / p.Nt;
    const auto gf = gauss_fermi_reduced(E_F[i] / kT, sh);
    g1[i] = g1_factor(nr, sh);
    g3[i] = g3_factor(nr, gf.dn);
  }
  const double field_scale = 1.0 / (h * std::cbrt(p.Nt) * p.sigma);
  AveragedFactors out;
  for (std::size_t k = 0; k + 1 < M; ++k) {
    const double dphi = phi[k + 1] - phi[k];
    const double w = upwind_weight(dphi / kT, mode);
    out.g1.push_back(w * g1[k] + (1.0 - w) * g1[k + 1]);
    out.g3.push_back(w * g3[k] + (1.0 - w) * g3[k + 1]);
    out.g2.push_back(g2_factor(std::fabs(dphi) * field_scale, sh));
  }
  return out;
}

}  // namespace egdm
