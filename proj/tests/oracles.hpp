#pragma once

/**
 * @file oracles.hpp
 * @brief Independent reference computations used by the tests.
 *
 * Nothing here calls the production assembly code; the only shared pieces are
 * the SI point functions (densities, g-factors, Scharfetter-Gummel flux) that
 * are tested on their own.
 */

#include <cmath>
#include <vector>

#include "egdm/discretization.hpp"
#include "egdm/gauss_fermi.hpp"
#include "egdm/gummel.hpp"
#include "egdm/model.hpp"

namespace egdm::test {

inline PhysicalParameters pasveer() { return {1.15e-5, 0.14, 2.44e26}; }
inline PhysicalParameters coehoorn() { return {1e-10, 0.077, 4.25e26}; }

inline std::vector<double> standard_voltages() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
}

inline double rel(double a, double b) { return std::fabs(a - b) / std::fmax(std::fabs(a), std::fabs(b)); }

/// Plain trapezoid rule of Nt g(E) f(E) over E in [-12 sigma, 12 sigma].
inline double brute_density(double E_F, const PhysicalParameters& p, double T, int points = 100000) {
  const double kT = constants::kB * T;
  const double a = -12.0 * p.sigma, b = 12.0 * p.sigma;
  const double h = (b - a) / points;
  double sum = 0.0;
  for (int k = 0; k <= points; ++k) {
    const double E = a + k * h;
    const double g = std::exp(-E * E / (2.0 * p.sigma * p.sigma)) / (std::sqrt(2.0 * constants::pi) * p.sigma);
    const double x = (E - E_F) / kT;
    const double f = x > 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
    sum += (k == 0 || k == points ? 0.5 : 1.0) * g * f;
  }
  return p.Nt * h * sum;
}

/// Same rule for dn/dE_F; the kernel f(1 - f)/kT is symmetric about E_F.
inline double brute_density_derivative(double E_F, const PhysicalParameters& p, double T, int points = 100000) {
  const double kT = constants::kB * T;
  const double a = -12.0 * p.sigma, b = 12.0 * p.sigma;
  const double h = (b - a) / points;
  double sum = 0.0;
  for (int k = 0; k <= points; ++k) {
    const double E = a + k * h;
    const double g = std::exp(-E * E / (2.0 * p.sigma * p.sigma)) / (std::sqrt(2.0 * constants::pi) * p.sigma);
    const double x = (E - E_F) / kT;
    const double c = std::cosh(0.5 * x);
    sum += (k == 0 || k == points ? 0.5 : 1.0) * g / (4.0 * c * c * kT);
  }
  return p.Nt * h * sum;
}

/// Nondegenerate limit n = Nt exp(E_F/kT + sigma_hat^2/2).
inline double boltzmann_density(double E_F, const PhysicalParameters& p, double T) {
  const double kT = constants::kB * T;
  const double sh = p.sigma / kT;
  return p.Nt * std::exp(E_F / kT + 0.5 * sh * sh);
}

/**
 * Coupled residual assembled in SI from point functions: interval fluxes from
 * sg_flux with averaged factors, the Poisson three-point stencil
 * phi'' = (e/eps) n (phi in eV), and the statistics n = n_GF(E_F). Rows are
 * made dimensionless like the solver's (continuity by drift + diffusion
 * magnitudes, Poisson by kT (2 + lambda h^2), statistics by Nt) so that the
 * norm is comparable with TOL.
 */
inline double independent_residual_norm(const PhysicalParameters& p, const FixedConstants& c,
                                        const OperatingPoint& op, const DeviceState& s,
                                        UpwindMode mode = UpwindMode::Logistic) {
  const int N = s.intervals();
  const double h = op.L / N;
  const double kT = c.kB * op.T;
  std::vector<double> n(N + 1), phi(N + 1), EF(N + 1);
  phi[0] = 0.0;
  phi[N] = op.V - (c.phi2 - c.phi1);
  for (int i = 1; i < N; ++i) {
    n[i] = s.n[i - 1];
    phi[i] = s.phi[i - 1];
    EF[i] = s.E_F[i - 1];
  }
  // contact: the image-force argument is -d(phi)/dx at x = 0
  const auto [n0, nL] = boundary_densities(-(phi[1] - phi[0]) / h, p, c, op.T);
  n[0] = n0;
  n[N] = nL;
  EF[0] = invert_gauss_fermi(n0, p, op.T);
  EF[N] = invert_gauss_fermi(nL, p, op.T);

  const auto avg = average_factors(n, phi, EF, p, op.T, h, mode);
  std::vector<double> J(N), mag(N);
  for (int k = 0; k < N; ++k) {
    const double drift = sg_flux(n[k], 0.0, phi[k], phi[k + 1], avg.g1[k], avg.g2[k], avg.g3[k], p, op.T, h);
    const double diff = sg_flux(0.0, n[k + 1], phi[k], phi[k + 1], avg.g1[k], avg.g2[k], avg.g3[k], p, op.T, h);
    J[k] = drift + diff;
    mag[k] = std::fabs(drift) + std::fabs(diff);
  }
  const double lam_h2 = c.e * p.Nt * h * h / (c.eps * kT);
  double sum = 0.0;
  for (int i = 1; i < N; ++i) {
    const double cont = (J[i] - J[i - 1]) / (mag[i] + mag[i - 1]);
    const double pois = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1] - h * h * c.e * n[i] / c.eps) / (kT * (2.0 + lam_h2));
    const double stat = (n[i] - gauss_fermi_density(EF[i], p, op.T)) / p.Nt;
    sum += cont * cont + pois * pois + stat * stat;
  }
  return std::sqrt(sum);
}

}  // namespace egdm::test
