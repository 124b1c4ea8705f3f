#pragma once

/**
 * @file scaling.hpp
 * @brief Mesh, device state and the internal reduced unit system.
 *
 * Reduced units: x by L, energies by kB T, densities by Nt and currents by
 * J0 = e mu0 g0 Nt kB T / L (kB T in eV, so the current is in A/m^2).
 */

#include <vector>

#include "egdm/model.hpp"

namespace egdm {

/// Uniform mesh with N subintervals; node i sits at x_i = i L / N.
struct Mesh {
  int N = 200;
  double L = 0.0;

  Mesh() = default;
  Mesh(int n, double length);  // throws ValidationError for N < 4 or L <= 0
  double h() const { return L / N; }
  double x(int i) const { return L * static_cast<double>(i) / N; }
};

/**
 * Discrete fields on the N-1 interior nodes plus the contact values. Units
 * are SI ([m^-3], [eV]) unless the state came from ScaledSystem::to_reduced.
 */
struct DeviceState {
  std::vector<double> n, phi, E_F;
  double n0 = 0.0, nL = 0.0;
  double phi0 = 0.0, phiL = 0.0;
  double EF0 = 0.0, EFL = 0.0;

  int intervals() const { return static_cast<int>(n.size()) + 1; }
};

struct ScaledSystem {
  double L = 0.0;          ///< [m]
  double kT = 0.0;         ///< [eV]
  double Nt = 0.0;         ///< [m^-3]
  double sigma_hat = 0.0;  ///< sigma / kT
  double g0 = 0.0;
  double J0 = 0.0;         ///< current scale [A/m^2]
  double lambda = 0.0;     ///< Poisson coupling e Nt L^2 / (eps kT)

  double reduce_x(double x) const { return x / L; }
  double expand_x(double xt) const { return xt * L; }
  double reduce_energy(double E) const { return E / kT; }
  double expand_energy(double Et) const { return Et * kT; }
  double reduce_density(double n) const { return n / Nt; }
  double expand_density(double nt) const { return nt * Nt; }
  double reduce_current(double J) const { return J / J0; }
  double expand_current(double Jt) const { return Jt * J0; }

  DeviceState to_reduced(const DeviceState& si) const;
  DeviceState to_si(const DeviceState& reduced) const;
};

/// Scale factors for one experiment; uses controls.L and controls.T only.
ScaledSystem nondimensionalize(const PhysicalParameters& p, const ExperimentControls& q,
                               const FixedConstants& c);

}  // namespace egdm
