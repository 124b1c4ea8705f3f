#pragma once

/**
 * @file verification.hpp
 * @brief Finite-difference and oracle checks of the solver and its derivatives.
 *
 * Each check reports the measured error next to its threshold. Finite
 * differences always go through full re-solves, never through the residual
 * derivative code they are checking.
 */

#include <string>
#include <vector>

#include "egdm/gummel.hpp"
#include "egdm/model.hpp"
#include "egdm/oed.hpp"
#include "egdm/sensitivity.hpp"

namespace egdm {

struct CheckResult {
  std::string name;
  double measured = 0.0;
  double threshold = 0.0;
  bool passed = false;
};

struct VerificationOptions {
  GummelSettings solver = [] {
    GummelSettings s;
    s.TOL = 1e-11;
    s.max_iter = 3000;
    return s;
  }();
  SensitivityOptions sensitivity;
  double first_order_tolerance = 1e-6;
  double mixed_tolerance = 1e-4;
  double residual_factor = 10.0;    ///< coupled residual < factor * TOL
  double flux_tolerance = 1e-10;
  double min_mesh_order = 1.0;
  std::vector<int> meshes{64, 128, 256};
};

/// Worst relative errors of dJ/dp_hat, dJ/dq (Richardson FD) and d2J/dp dq (central FD of exact dJ/dp).
struct SensitivityErrors {
  double first = 0.0;
  double mixed = 0.0;
};

SensitivityErrors sensitivity_fd_errors(const PhysicalParameters& p, const FixedConstants& c,
                                        const OperatingPoint& op, const VerificationOptions& opt);

/// Observed order log2(|J_a - J_b| / |J_b - J_c|) of the terminal current over three meshes.
double observed_mesh_order(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                           const VerificationOptions& opt);

/**
 * Largest relative error of the design gradient against central differences of
 * the objective. The step shrinks (by 4, at most five times) until both stencil
 * points share the clamp signature of d, since the objective is only piecewise
 * smooth across clamp switches.
 */
double objective_gradient_error(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                const std::vector<double>& voltages, const OedSettings& s,
                                double relative_step = 1e-4);

/**
 * Full check table for one configuration: coupled residual and flux
 * conservation over every experiment sweep, sensitivity FD checks at three
 * operating points spread over the design, and mesh convergence.
 */
std::vector<CheckResult> run_verification(const PhysicalParameters& p, const FixedConstants& c,
                                          const DesignVector& d, const std::vector<double>& voltages,
                                          const VerificationOptions& opt);

}  // namespace egdm
