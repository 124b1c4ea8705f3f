/**
 * @file verification.cpp
 * @brief Finite-difference and oracle checks of the solver and its derivatives.
 */

#include "egdm/verification.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

namespace {

double rel_error(double exact, double approx) {
  const double scale = std::max(std::fabs(exact), std::fabs(approx));
  return scale == 0.0 ? 0.0 : std::fabs(exact - approx) / scale;
}

/// Richardson-extrapolated central difference of f at 0 with step h.
template <class F>
double richardson(F&& f, double h) {
  const double d1 = (f(2.0 * h) - f(-2.0 * h)) / (4.0 * h);
  const double d2 = (f(h) - f(-h)) / (2.0 * h);
  return (4.0 * d2 - d1) / 3.0;
}

OperatingPoint shifted(OperatingPoint op, int control, double delta) {
  (control == 0 ? op.L : op.T) += delta;
  return op;
}

}  // namespace

SensitivityErrors sensitivity_fd_errors(const PhysicalParameters& p, const FixedConstants& c,
                                        const OperatingPoint& op, const VerificationOptions& opt) {
  const GummelSettings& s = opt.solver;
  const SolveResult base = gummel_solve(p, c, op, s);
  SensitivityOptions so = opt.sensitivity;
  so.second_order = true;
  const SensitivityBundle b = state_sensitivities(base, p, c, s, so);

  SensitivityErrors err;
  for (int k = 0; k < kNumParameters; ++k) {
    const double fd = richardson(
        [&](double h) {
          PhysicalParameters q = p;
          q[k] *= 1.0 + h;
          return gummel_solve(q, c, op, s, &base.state).J;
        },
        1e-4);
    err.first = std::max(err.first, rel_error(b.dJ_dp[k], fd));
  }
  for (int l = 0; l < kNumControls; ++l) {
    const double h = l == 0 ? 1e-4 * op.L : 1e-4 * op.T;
    const double fd =
        richardson([&](double t) { return gummel_solve(p, c, shifted(op, l, t), s, &base.state).J; }, h);
    err.first = std::max(err.first, rel_error(b.dJ_dq[l], fd));

    SensitivityOptions first_only = opt.sensitivity;
    first_only.second_order = false;
    const auto plus = state_sensitivities(gummel_solve(p, c, shifted(op, l, h), s, &base.state), p, c, s, first_only);
    const auto minus =
        state_sensitivities(gummel_solve(p, c, shifted(op, l, -h), s, &base.state), p, c, s, first_only);
    for (int k = 0; k < kNumParameters; ++k) {
      const double fd2 = (plus.dJ_dp[k] - minus.dJ_dp[k]) / (2.0 * h);
      err.mixed = std::max(err.mixed, rel_error(b.d2J_dpdq(k, l), fd2));
    }
  }
  return err;
}

double observed_mesh_order(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                           const VerificationOptions& opt) {
  if (opt.meshes.size() != 3) throw DomainError("mesh convergence needs exactly three meshes");
  double J[3];
  for (int i = 0; i < 3; ++i) {
    GummelSettings s = opt.solver;
    s.N = opt.meshes[i];
    J[i] = gummel_solve(p, c, op, s).J;
  }
  const double ratio = static_cast<double>(opt.meshes[1]) / opt.meshes[0];
  return std::log(std::fabs(J[0] - J[1]) / std::fabs(J[1] - J[2])) / std::log(ratio);
}

double objective_gradient_error(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                const std::vector<double>& voltages, const OedSettings& s,
                                double relative_step) {
  WarmStartCache cache;
  const auto exact = assemble_covariance(p, c, d, voltages, s, true, &cache);
  const auto x = d.as_vector();
  double worst = 0.0;
  for (int i = 0; i < 6; ++i) {
    // the objective is piecewise smooth (exact clamps); keep the stencil on the branch of x
    double h = relative_step * x[i], fd = 0.0;
    for (int shrink = 0; shrink < 6; ++shrink, h *= 0.25) {
      auto xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      WarmStartCache cp = cache, cm = cache;
      const auto rp = assemble_covariance(p, c, DesignVector::from_vector(xp), voltages, s, false, &cp);
      const auto rm = assemble_covariance(p, c, DesignVector::from_vector(xm), voltages, s, false, &cm);
      fd = (rp.objective - rm.objective) / (2.0 * h);
      if (rp.clamp_signature == exact.clamp_signature && rm.clamp_signature == exact.clamp_signature) break;
    }
    worst = std::max(worst, rel_error(exact.gradient[i], fd));
  }
  return worst;
}

std::vector<CheckResult> run_verification(const PhysicalParameters& p, const FixedConstants& c,
                                          const DesignVector& d, const std::vector<double>& voltages,
                                          const VerificationOptions& opt) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double measured, double threshold) {
    out.push_back({std::move(name), measured, threshold, std::isfinite(measured) && measured < threshold});
  };

  double worst_res = 0.0, worst_flux = 0.0;
  for (int e = 0; e < kNumExperiments; ++e) {
    const auto q = d.experiment(e, voltages);
    for (const auto& r : voltage_sweep(p, c, q, opt.solver)) {
      // recomputed independently of the value the solver reported
      worst_res = std::max(worst_res, coupled_residual_norm(p, c, r.op, opt.solver, r.state));
      worst_flux = std::max(worst_flux, r.frozen_flux_spread);
    }
  }
  add("coupled residual / TOL (all sweeps)", worst_res / opt.solver.TOL, opt.residual_factor);
  add("interval flux spread (all sweeps)", worst_flux, opt.flux_tolerance);

  const double vlo = *std::min_element(voltages.begin(), voltages.end());
  const double vhi = *std::max_element(voltages.begin(), voltages.end());
  const std::array<OperatingPoint, 3> points{{{d.L[0], d.T[0], vlo},
                                              {d.L[1], d.T[1], 0.5 * (vlo + vhi)},
                                              {d.L[2], d.T[2], vhi}}};
  for (const auto& op : points) {
    const auto e = sensitivity_fd_errors(p, c, op, opt);
    const auto tag = fmt::format("L = {:.4g} nm, T = {:.4g} K, V = {:.4g} V", op.L * 1e9, op.T, op.V);
    add("first-order sensitivity FD, " + tag, e.first, opt.first_order_tolerance);
    add("mixed second-order sensitivity FD, " + tag, e.mixed, opt.mixed_tolerance);
  }

  const OperatingPoint mesh_op{d.L[1], d.T[1], vhi};
  const double order = observed_mesh_order(p, c, mesh_op, opt);
  // the one row where larger is better
  out.push_back({fmt::format("mesh order {}-{}-{} (measured order)", opt.meshes[0], opt.meshes[1], opt.meshes[2]),
                 order, opt.min_mesh_order, std::isfinite(order) && order >= opt.min_mesh_order});
  return out;
}

}  // namespace egdm
