/**
 * @file oed.cpp
 * @brief Covariance assembly, confidence regions, design objective and optimiser.
 */

#include "egdm/oed.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "egdm/errors.hpp"

namespace egdm {

ExperimentControls DesignVector::experiment(int e, const std::vector<double>& voltages) const {
  if (e < 0 || e >= kNumExperiments) throw DomainError(fmt::format("experiment index {} out of range", e));
  return {L[length_index(e)], T[temperature_index(e)], voltages};
}

std::array<double, 2 * kNumExperiments> DesignVector::expand() const {
  std::array<double, 2 * kNumExperiments> Q{};
  for (int e = 0; e < kNumExperiments; ++e) {
    Q[2 * e] = L[length_index(e)];
    Q[2 * e + 1] = T[temperature_index(e)];
  }
  return Q;
}

Eigen::Matrix<double, 6, 1> DesignVector::as_vector() const {
  Eigen::Matrix<double, 6, 1> x;
  x << L[0], L[1], L[2], T[0], T[1], T[2];
  return x;
}

DesignVector DesignVector::from_vector(const Eigen::Matrix<double, 6, 1>& x) {
  DesignVector d;
  for (int i = 0; i < 3; ++i) {
    d.L[i] = x[i];
    d.T[i] = x[3 + i];
  }
  return d;
}

void DesignBounds::validate() const {
  if (!(L_min > 0.0 && L_max > L_min)) throw ValidationError("length bounds must satisfy 0 < L_min < L_max");
  if (!(T_min > 0.0 && T_max > T_min)) throw ValidationError("temperature bounds must satisfy 0 < T_min < T_max");
}

bool DesignBounds::contains(const DesignVector& d, double slack) const {
  for (int i = 0; i < 3; ++i) {
    if (d.L[i] < L_min * (1.0 - slack) || d.L[i] > L_max * (1.0 + slack)) return false;
    if (d.T[i] < T_min * (1.0 - slack) || d.T[i] > T_max * (1.0 + slack)) return false;
  }
  return true;
}

Eigen::Matrix<double, 6, 1> DesignBounds::lower() const {
  Eigen::Matrix<double, 6, 1> x;
  x << L_min, L_min, L_min, T_min, T_min, T_min;
  return x;
}

Eigen::Matrix<double, 6, 1> DesignBounds::upper() const {
  Eigen::Matrix<double, 6, 1> x;
  x << L_max, L_max, L_max, T_max, T_max, T_max;
  return x;
}

double chi_square_gamma(double alpha, int dof) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError(fmt::format("alpha = {} must lie in (0, 1)", alpha));
  if (dof < 1) throw DomainError("chi-square needs dof >= 1");
  const boost::math::chi_squared dist(dof);
  return std::sqrt(boost::math::quantile(dist, alpha));
}

Eigen::Matrix3d covariance_from_jacobian(const Eigen::MatrixXd& jac) {
  if (jac.cols() != 3) throw DomainError("covariance: Jacobian must have three columns");
  const Eigen::Matrix3d info = jac.transpose() * jac;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(info);
  const double lmax = eig.eigenvalues().maxCoeff();
  const double lmin = eig.eigenvalues().minCoeff();
  if (!(lmax > 0.0) || !(lmin > 1e-14 * lmax)) {
    const Eigen::Vector3d v = eig.eigenvectors().col(0);
    throw IdentifiabilityError(fmt::format(
        "information matrix is singular (eigenvalue ratio {:.3e}); unidentifiable direction "
        "(mu0, sigma, Nt) ~ ({:.4f}, {:.4f}, {:.4f})",
        lmax > 0.0 ? lmin / lmax : 0.0, v[0], v[1], v[2]));
  }
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(info);
  Eigen::Matrix3d C;
  for (int k = 0; k < 3; ++k) C.col(k) = ldlt.solve(Eigen::Vector3d::Unit(k));
  return 0.5 * (C + C.transpose());
}

namespace {

struct ExperimentOutcome {
  ExperimentJacobian jac;
  std::vector<int> iterations;
  std::vector<double> residuals;
  double max_residual = 0.0, max_spread = 0.0, max_state_spread = 0.0;
  int kinks = 0;
  std::vector<int> clamped;
};

ExperimentOutcome run_experiment(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                 int e, const std::vector<double>& voltages, const OedSettings& s,
                                 bool with_gradient, WarmStartCache* cache) {
  const ExperimentControls q = d.experiment(e, voltages);
  const std::vector<DeviceState>* warm = cache ? &cache->states[e] : nullptr;
  const auto sols = voltage_sweep(p, c, q, s.solver, warm);
  std::vector<SensitivityBundle> bundles;
  bundles.reserve(sols.size());
  SensitivityOptions so = s.sensitivity;
  so.second_order = with_gradient;
  ExperimentOutcome out;
  for (const auto& r : sols) {
    bundles.push_back(state_sensitivities(r, p, c, s.solver, so));
    out.iterations.push_back(r.iterations);
    out.residuals.push_back(r.residual);
    out.max_residual = std::max(out.max_residual, r.residual);
    out.max_spread = std::max(out.max_spread, r.frozen_flux_spread);
    out.max_state_spread = std::max(out.max_state_spread, r.flux_spread);
    const auto& k = bundles.back().kinks;
    out.kinks += k.density_clamp + k.field_clamp + k.image_force;
    out.clamped.push_back(k.clamped());
  }
  out.jac = measurement_jacobian(bundles, s.noise, with_gradient);
  if (cache) {
    auto& slot = cache->states[e];
    slot.resize(sols.size());
    for (std::size_t k = 0; k < sols.size(); ++k) slot[k] = sols[k].state;
  }
  return out;
}

/// Runs f(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class F>
void parallel_for(int n, int threads, F&& f) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

CovarianceReport assemble_covariance(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                     const std::vector<double>& voltages, const OedSettings& s,
                                     bool with_gradient, WarmStartCache* cache) {
  validate(p);
  validate(c);
  s.solver.validate();
  std::array<ExperimentOutcome, kNumExperiments> outcomes;
  parallel_for(kNumExperiments, s.threads, [&](int e) {
    try {
      outcomes[e] = run_experiment(p, c, d, e, voltages, s, with_gradient, cache);
    } catch (const ConvergenceError& err) {
      throw ConvergenceError(fmt::format("experiment {} (L = {:.4g} nm, T = {:.4g} K): {}", e + 1,
                                         d.L[DesignVector::length_index(e)] * 1e9,
                                         d.T[DesignVector::temperature_index(e)], err.what()),
                             err.last_residual(), err.iterations());
    }
  });

  CovarianceReport r;
  const int M = static_cast<int>(voltages.size());
  r.jac.resize(kNumExperiments * M, 3);
  for (int e = 0; e < kNumExperiments; ++e) {
    const auto& o = outcomes[e];
    r.jac.block(e * M, 0, M, 3) = o.jac.jac;
    for (int m = 0; m < M; ++m) r.row_experiment.push_back(e);
    r.currents[e] = o.jac.J;
    r.iterations[e] = o.iterations;
    r.residuals[e] = o.residuals;
    r.max_coupled_residual = std::max(r.max_coupled_residual, o.max_residual);
    r.max_flux_spread = std::max(r.max_flux_spread, o.max_spread);
    r.max_state_flux_spread = std::max(r.max_state_flux_spread, o.max_state_spread);
    r.kink_hits += o.kinks;
    r.clamp_signature.insert(r.clamp_signature.end(), o.clamped.begin(), o.clamped.end());
  }
  r.covp = covariance_from_jacobian(r.jac);
  r.objective = r.covp.trace() / 3.0;
  r.gamma = chi_square_gamma(s.alpha, kNumParameters);
  r.gamma_dof1 = chi_square_gamma(s.alpha, 1);
  for (int i = 0; i < 3; ++i) {
    r.theta[i] = 100.0 * r.gamma * std::sqrt(r.covp(i, i));
    r.theta_dof1[i] = 100.0 * r.gamma_dof1 * std::sqrt(r.covp(i, i));
  }

  if (with_gradient) {
    // d tr(C) = -2 tr(C^2 Jac^T dJac); only the rows of experiment e move with its controls
    const Eigen::Matrix3d C2 = r.covp * r.covp;
    for (int e = 0; e < kNumExperiments; ++e) {
      const Eigen::MatrixXd& Fe = outcomes[e].jac.jac;
      for (int l = 0; l < kNumControls; ++l) {
        const Eigen::Matrix3d G = Fe.transpose() * outcomes[e].jac.djac_dq[l];
        const double dphi = -2.0 / 3.0 * (C2 * G).trace();
        const int var = l == 0 ? DesignVector::length_index(e) : 3 + DesignVector::temperature_index(e);
        r.gradient[var] += dphi;
      }
    }
    r.has_gradient = true;
  }
  return r;
}

ConfidenceDescriptors confidence_descriptors(const Eigen::Matrix3d& covp, double gamma, int points) {
  ConfidenceDescriptors out;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(covp);
  if (eig.eigenvalues().minCoeff() <= 0.0) throw DomainError("confidence region needs an SPD covariance");
  for (int i = 0; i < 3; ++i) {
    out.theta[i] = 100.0 * gamma * std::sqrt(covp(i, i));
    out.semi_axis_lengths[i] = gamma * std::sqrt(eig.eigenvalues()[i]);
    out.axes.col(i) = out.semi_axis_lengths[i] * eig.eigenvectors().col(i);
  }
  for (std::size_t k = 0; k < ConfidenceDescriptors::pairs.size(); ++k) {
    const auto [i, j] = ConfidenceDescriptors::pairs[k];
    Eigen::Matrix2d S;
    S << covp(i, i), covp(i, j), covp(j, i), covp(j, j);
    const Eigen::Matrix2d Lc = Eigen::LLT<Eigen::Matrix2d>(S).matrixL();
    out.projections[k].reserve(points);
    for (int t = 0; t < points; ++t) {
      const double a = 2.0 * constants::pi * t / points;
      out.projections[k].push_back(gamma * Lc * Eigen::Vector2d(std::cos(a), std::sin(a)));
    }
  }
  return out;
}

ObjectiveValue design_objective(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                const std::vector<double>& voltages, const OedSettings& s,
                                WarmStartCache* cache) {
  const auto r = assemble_covariance(p, c, d, voltages, s, true, cache);
  return {r.objective, r.gradient};
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct ScaledProblem {
  Vec6 lo, span;
  DesignVector design(const Vec6& s) const { return DesignVector::from_vector(lo + span.cwiseProduct(s)); }
  Vec6 scaled(const DesignVector& d) const { return (d.as_vector() - lo).cwiseQuotient(span); }
};

Vec6 project(Vec6 s) { return s.cwiseMax(0.0).cwiseMin(1.0); }

OptimizationResult run_single(const std::function<ObjectiveValue(const Vec6&)>& eval, const ScaledProblem& sp,
                              Vec6 s, const OptimizerOptions& opt, const ProgressCallback& progress) {
  OptimizationResult res;
  s = project(s);
  ObjectiveValue cur = eval(s);
  int evals = 1;
  Vec6 g = sp.span.cwiseProduct(cur.gradient);
  res.initial_objective = cur.value;
  res.history.push_back({0, cur.value, sp.design(s)});
  if (progress) progress(res.history.back());

  const double pg0 = (project(s - g) - s).norm();
  Mat6 H = Mat6::Identity();
  bool fresh = true;
  std::array<bool, 6> prev_active{};
  res.termination = "iteration limit";
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const double pg = (project(s - g) - s).norm();
    if (pg <= opt.gradient_tolerance * pg0 || pg == 0.0) {
      res.converged = true;
      res.termination = "projected gradient";
      break;
    }
    std::array<bool, 6> active{};
    for (int i = 0; i < 6; ++i) active[i] = (s[i] <= 0.0 && g[i] > 0.0) || (s[i] >= 1.0 && g[i] < 0.0);
    // curvature gathered with a different free set misleads the new subspace
    if (active != prev_active) fresh = true;
    prev_active = active;
    auto restricted = [&](const Vec6& v) {
      Vec6 w = v;
      for (int i = 0; i < 6; ++i)
        if (active[i]) w[i] = 0.0;
      return w;
    };
    Vec6 d = -(H * restricted(g));
    d = restricted(d);
    if (fresh || g.dot(d) >= 0.0) {
      H.setIdentity();
      fresh = true;
      d = restricted(-g);
      const double m = d.cwiseAbs().maxCoeff();
      if (m > 0.0) d *= 0.25 / m;
    }

    double t = 1.0;
    bool accepted = false;
    Vec6 s_new, step;
    ObjectiveValue trial;
    for (int bt = 0; bt <= opt.max_backtracks; ++bt, t *= 0.5) {
      s_new = project(s + t * d);
      step = s_new - s;
      if (step.norm() < opt.step_tolerance) break;
      trial = eval(s_new);
      ++evals;
      if (trial.value <= cur.value + opt.armijo * g.dot(step)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if (step.norm() < opt.step_tolerance) {
        res.converged = true;
        res.termination = "step size";
      } else {
        res.converged = false;
        res.termination = "line search failed";
      }
      break;
    }
    const Vec6 g_new = sp.span.cwiseProduct(trial.gradient);
    const Vec6 y = g_new - g;
    const double ys = y.dot(step);
    if (ys > 1e-12 * y.norm() * step.norm()) {
      if (fresh) H = Mat6::Identity() * (ys / y.dot(y));
      const double rho = 1.0 / ys;
      const Mat6 V = Mat6::Identity() - rho * step * y.transpose();
      H = V * H * V.transpose() + rho * step * step.transpose();
      fresh = false;
    }
    s = s_new;
    g = g_new;
    cur = trial;
    res.history.push_back({it, cur.value, sp.design(s)});
    if (progress) progress(res.history.back());
    if (step.norm() < opt.step_tolerance) {
      res.converged = true;
      res.termination = "step size";
      break;
    }
  }
  res.design = sp.design(s);
  res.objective = cur.value;
  res.evaluations = evals;
  return res;
}

}  // namespace

OptimizationResult optimize_design(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& start,
                                   const std::vector<double>& voltages, const OedSettings& s,
                                   const DesignBounds& bounds, const OptimizerOptions& opt,
                                   const ProgressCallback& progress) {
  bounds.validate();
  if (!bounds.contains(start, 1e-12)) throw ValidationError("initial design violates the bounds");
  ScaledProblem sp{bounds.lower(), bounds.upper() - bounds.lower()};
  WarmStartCache cache;
  auto eval = [&](const Vec6& sv) { return design_objective(p, c, sp.design(sv), voltages, s, &cache); };

  OptimizationResult best = run_single(eval, sp, sp.scaled(start), opt, progress);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int k = 0; k < opt.multi_start; ++k) {
    Vec6 s0;
    for (int i = 0; i < 6; ++i) s0[i] = uni(rng);
    cache = WarmStartCache{};
    OptimizationResult r = run_single(eval, sp, s0, opt, progress);
    r.initial_objective = best.initial_objective;
    r.evaluations += best.evaluations;
    if (r.objective < best.objective) {
      best = std::move(r);
    } else {
      best.evaluations = r.evaluations;
    }
  }
  return best;
}

}  // namespace egdm
