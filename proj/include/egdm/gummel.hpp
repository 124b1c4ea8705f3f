#pragma once

/**
 * @file gummel.hpp
 * @brief Extended Gummel iteration for the EGDM system on a uniform mesh.
 *
 * One cycle maps (n, phi, E_F) to new values in three decoupled steps:
 *   1. E_F from the statistics, node by node (safeguarded Newton);
 *   2. Poisson for phi with the density frozen (optionally linearised about
 *      the current quasi-Fermi level, which keeps the step stable when the
 *      Debye length is far below the mesh width);
 *   3. continuity for n with g1(n_old), g3(n_old, E_F_new), g2(phi_new).
 * The contact density n(0) is refreshed every cycle from the image-force
 * lowering at the current boundary field.
 */

#include <optional>
#include <vector>

#include "egdm/discretization.hpp"
#include "egdm/model.hpp"
#include "egdm/scaling.hpp"

namespace egdm {

enum class Acceleration {
  None,     ///< damped fixed-point iteration
  Anderson  ///< Anderson mixing in (log n, phi); history cleared when the residual doubles
};

struct GummelSettings {
  int N = 200;
  double TOL = 1e-8;   ///< on the 2-norm of the reduced update
  int max_iter = 500;
  double damping = 1.0;  ///< initial relaxation factor omega
  double min_damping = 1.0 / 64.0;
  bool continuation = true;  ///< retry failed cold starts through intermediate voltages
  Acceleration acceleration = Acceleration::Anderson;
  int anderson_depth = 10;
  UpwindMode upwind = UpwindMode::Logistic;
  bool quasi_fermi_predictor = true;  ///< false: literal Poisson step with n frozen

  void validate() const;  ///< throws ValidationError
};

struct OperatingPoint {
  double L = 0.0;  ///< [m]
  double T = 0.0;  ///< [K]
  double V = 0.0;  ///< [V]
};

struct SolveResult {
  OperatingPoint op;
  DeviceState state;        ///< SI fields
  std::vector<double> u;    ///< reduced interleaved unknowns (see discretization.hpp)
  double J = 0.0;           ///< measured current density [A/m^2]
  int iterations = 0;
  bool converged = false;
  double update_norm = 0.0;         ///< last reduced update norm
  double residual = 0.0;            ///< 2-norm of the coupled residual at the returned state
  double flux_spread = 0.0;         ///< max_k |J_k - J_mid| / |J_mid| with the state's own coefficients
  double frozen_flux_spread = 0.0;  ///< same for the final continuity solve (frozen coefficients)
};

/**
 * Reduced Poisson solve -phi'' = coupling * (n + d (phi - phi_ref)) on the
 * unit interval with Dirichlet values; d and phi_ref are optional (both or
 * neither). Returns the N-1 interior values, N = n.size() + 1.
 */
std::vector<double> solve_poisson(const std::vector<double>& n, double phi0, double phiN,
                                  double coupling, const std::vector<double>* d = nullptr,
                                  const std::vector<double>* phi_ref = nullptr);

struct ContinuityResult {
  std::vector<double> n;     ///< interior reduced densities
  std::vector<double> flux;  ///< reduced interval fluxes a_k n_k - b_k n_{k+1}
  double spread = 0.0;
};

/**
 * Solves J_k - J_{k-1} = 0 for interval fluxes J_k = a_k n_k - b_k n_{k+1}
 * with Dirichlet densities n0, nN. a and b have N entries.
 */
ContinuityResult solve_continuity(const std::vector<double>& a, const std::vector<double>& b,
                                  double n0, double nN);

/**
 * Continuity step with frozen factors: n_frozen, phi and dn (dn/deta at the
 * nodes) are full node vectors (N+1 entries) whose ends carry the contact
 * values. g1 and g3 come from n_frozen and dn, g2 and the upwind weights from
 * phi.
 */
ContinuityResult solve_continuity(const DiscreteCoefficients<double>& cf,
                                  const std::vector<double>& n_frozen, const std::vector<double>& phi,
                                  const std::vector<double>& dn);

/// Initial guess: linear phi, geometric n between the contact values, E_F from the statistics.
DeviceState initial_guess(const PhysicalParameters& p, const FixedConstants& c,
                          const OperatingPoint& op, int N);

/**
 * Solves one operating point. `initial` (same N) warm-starts the iteration.
 * Throws ConvergenceError when max_iter is exceeded or values turn
 * non-finite, ModelValidityError for sigma/(kB T) <= 1.
 */
SolveResult gummel_solve(const PhysicalParameters& p, const FixedConstants& c,
                         const OperatingPoint& op, const GummelSettings& s,
                         const DeviceState* initial = nullptr);

/// One Gummel cycle applied to `state` (no damping); returns the mapped state in SI.
DeviceState gummel_cycle(const PhysicalParameters& p, const FixedConstants& c,
                         const OperatingPoint& op, const GummelSettings& s, const DeviceState& state);

/// 2-norm of the reduced difference between two states at the same operating point.
double reduced_distance(const DeviceState& a, const DeviceState& b, double Nt, double kT);

/**
 * Solves all voltages of q in ascending order, each warm-started from the
 * previous result, or from warm[k] when supplied. Errors are rethrown with
 * the failing voltage in the message.
 */
std::vector<SolveResult> voltage_sweep(const PhysicalParameters& p, const FixedConstants& c,
                                       const ExperimentControls& q, const GummelSettings& s,
                                       const std::vector<DeviceState>* warm = nullptr);

/// Reduced interleaved unknown vector of a state.
std::vector<double> pack_state(const DeviceState& s, double Nt, double kT);

/// Coupled residual of an SI state (Relative row scaling) and its 2-norm.
double coupled_residual_norm(const PhysicalParameters& p, const FixedConstants& c,
                             const OperatingPoint& op, const GummelSettings& s,
                             const DeviceState& state);

}  // namespace egdm
