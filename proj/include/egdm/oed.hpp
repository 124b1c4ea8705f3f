#pragma once

/**
 * @file oed.hpp
 * @brief Covariance, confidence regions and optimum experimental design.
 *
 * Nine experiments share three lengths and three temperatures: experiment
 * e = 3a + b runs at (L_a, T_b). Parameters are taken relative to their
 * nominal values, so covariance entries are relative and the confidence
 * radii are percentages.
 */

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

#include "egdm/gummel.hpp"
#include "egdm/model.hpp"
#include "egdm/sensitivity.hpp"

namespace egdm {

inline constexpr int kNumExperiments = 9;
inline constexpr int kNumDesignVariables = 6;

struct DesignVector {
  std::array<double, 3> L{};  ///< [m]
  std::array<double, 3> T{};  ///< [K]

  static int length_index(int e) { return e / 3; }
  static int temperature_index(int e) { return e % 3; }
  ExperimentControls experiment(int e, const std::vector<double>& voltages) const;
  /// Stacked Q = (L(e), T(e)) over the nine experiments, 18 entries.
  std::array<double, 2 * kNumExperiments> expand() const;
  /// (L1, L2, L3, T1, T2, T3)
  Eigen::Matrix<double, 6, 1> as_vector() const;
  static DesignVector from_vector(const Eigen::Matrix<double, 6, 1>& x);
};

struct DesignBounds {
  double L_min = 50e-9, L_max = 500e-9;  ///< [m]
  double T_min = 200.0, T_max = 350.0;   ///< [K]

  void validate() const;
  bool contains(const DesignVector& d, double slack = 0.0) const;
  Eigen::Matrix<double, 6, 1> lower() const;
  Eigen::Matrix<double, 6, 1> upper() const;
};

struct OedSettings {
  GummelSettings solver;
  MeasurementModel noise;
  double alpha = 0.95;
  int threads = 1;
  SensitivityOptions sensitivity;
};

/// gamma with gamma^2 the alpha-quantile of chi^2(dof).
double chi_square_gamma(double alpha, int dof);

/// Warm states per experiment and voltage, reused between evaluations.
struct WarmStartCache {
  std::array<std::vector<DeviceState>, kNumExperiments> states;
};

struct CovarianceReport {
  Eigen::MatrixXd jac;             ///< M x 3
  std::vector<int> row_experiment; ///< experiment index of each row
  Eigen::Matrix3d covp;
  double objective = 0.0;          ///< trace(covp) / 3
  double gamma = 0.0;              ///< dof = 3
  double gamma_dof1 = 0.0;
  Eigen::Vector3d theta;           ///< percent, with gamma
  Eigen::Vector3d theta_dof1;      ///< percent, with gamma_dof1
  std::array<Eigen::VectorXd, kNumExperiments> currents;
  std::array<std::vector<int>, kNumExperiments> iterations;
  std::array<std::vector<double>, kNumExperiments> residuals;
  double max_coupled_residual = 0.0;
  double max_flux_spread = 0.0;         ///< final continuity solves
  double max_state_flux_spread = 0.0;   ///< recomputed from the double-precision states
  int kink_hits = 0;
  /// Clamped-branch evaluations per (experiment, voltage); the objective is smooth only while this is unchanged.
  std::vector<int> clamp_signature;
  Eigen::Matrix<double, 6, 1> gradient = Eigen::Matrix<double, 6, 1>::Zero();  ///< d objective / d(L [m], T [K])
  bool has_gradient = false;
};

/**
 * Covp = (Jac^T Jac)^-1 by column solves of an LDL^T factorisation. Throws
 * IdentifiabilityError naming the weakest direction when the information
 * matrix is numerically singular.
 */
Eigen::Matrix3d covariance_from_jacobian(const Eigen::MatrixXd& jac);

/**
 * Solves all nine experiments, builds the stacked Jacobian and the covariance.
 * With `with_gradient` also returns the objective gradient over the six
 * design variables. The cache (optional) supplies and receives warm states.
 */
CovarianceReport assemble_covariance(const PhysicalParameters& p, const FixedConstants& c,
                                     const DesignVector& d, const std::vector<double>& voltages,
                                     const OedSettings& s, bool with_gradient = false,
                                     WarmStartCache* cache = nullptr);

struct ConfidenceDescriptors {
  Eigen::Vector3d theta;          ///< percent
  Eigen::Matrix3d axes;           ///< columns: principal semi-axes (gamma sqrt(lambda) v)
  Eigen::Vector3d semi_axis_lengths;
  /// 2D shadows for the pairs (0,1), (0,2), (1,2); each is a list of boundary points
  std::array<std::vector<Eigen::Vector2d>, 3> projections;
  static constexpr std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
};

ConfidenceDescriptors confidence_descriptors(const Eigen::Matrix3d& covp, double gamma, int points = 200);

struct ObjectiveValue {
  double value = 0.0;
  Eigen::Matrix<double, 6, 1> gradient = Eigen::Matrix<double, 6, 1>::Zero();
};

/// trace(Covp)/3 and its gradient over (L1, L2, L3 [m], T1, T2, T3 [K]).
ObjectiveValue design_objective(const PhysicalParameters& p, const FixedConstants& c, const DesignVector& d,
                                const std::vector<double>& voltages, const OedSettings& s,
                                WarmStartCache* cache = nullptr);

struct OptimizerOptions {
  int max_iterations = 40;
  double gradient_tolerance = 1e-6;  ///< relative to the initial projected-gradient norm
  double step_tolerance = 1e-4;      ///< in scaled variables s in [0, 1]^6
  double armijo = 1e-4;
  int max_backtracks = 8;
  int multi_start = 0;               ///< additional seeded random starts
  unsigned long long seed = 20240607ULL;
};

struct HistoryEntry {
  int iteration = 0;
  double objective = 0.0;
  DesignVector design;
};

struct OptimizationResult {
  DesignVector design;
  double objective = 0.0;
  double initial_objective = 0.0;
  bool converged = false;
  std::string termination;
  int evaluations = 0;
  std::vector<HistoryEntry> history;  ///< accepted iterates of the best run
};

using ProgressCallback = std::function<void(const HistoryEntry&)>;

/**
 * Projected BFGS with Armijo backtracking along the projection arc in scaled
 * variables. Returns the best iterate; converged is false when the line
 * search fails before a termination test is met.
 */
OptimizationResult optimize_design(const PhysicalParameters& p, const FixedConstants& c,
                                   const DesignVector& start, const std::vector<double>& voltages,
                                   const OedSettings& s, const DesignBounds& bounds,
                                   const OptimizerOptions& opt = {}, const ProgressCallback& progress = {});

}  // namespace egdm
