#pragma once

/**
 * @file sensitivity.hpp
 * @brief Exact state and measurement sensitivities by the implicit function theorem.
 *
 * Parameters enter in relative coordinates p_hat_k = p_k / p_k^0 (derivatives
 * are per unit relative change), controls q = (L [m], T [K]) in SI. Residual
 * derivatives come from forward-mode dual numbers through the whole residual
 * code path, so they carry no truncation error.
 */

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <vector>

#include "egdm/banded_lu.hpp"
#include "egdm/discretization.hpp"
#include "egdm/gummel.hpp"
#include "egdm/model.hpp"

namespace egdm {

inline constexpr int kNumControls = 2;  // (L, T)

/**
 * Discrete residual F(u, p_hat, q) at one voltage with its exact directional
 * derivatives. The nominal parameters fix the relative coordinates.
 */
class ResidualSystem {
 public:
  ResidualSystem(const PhysicalParameters& nominal, const FixedConstants& c, double V, int N,
                 UpwindMode upwind = UpwindMode::Logistic);

  int unknowns() const noexcept { return kFieldsPerNode * (N_ - 1); }
  int intervals() const noexcept { return N_; }
  double voltage() const noexcept { return V_; }

  struct Value {
    std::vector<double> F;
    double J = 0.0;  ///< measured current [A/m^2]
  };

  /// F and J at (u, p_hat, q).
  Value evaluate(const std::vector<double>& u, const Eigen::Vector3d& p_hat, const Eigen::Vector2d& q,
                 KinkMonitor* kinks = nullptr) const;

  /// First directional derivative along (du, dp, dq).
  Value directional(const std::vector<double>& u, const Eigen::Vector3d& p_hat, const Eigen::Vector2d& q,
                    const std::vector<double>& du, const Eigen::Vector3d& dp, const Eigen::Vector2d& dq) const;

  /**
   * Mixed second derivative of t -> F(u + s a_u + t b_u + s t c_u, p + s a_p + t b_p, q + s a_q + t b_q)
   * at s = t = 0 (the d^2/ds dt coefficient). Null c_u means zero.
   */
  Value second_directional(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                           const Eigen::Vector2d& q, const std::vector<double>& a_u,
                           const Eigen::Vector3d& a_p, const Eigen::Vector2d& a_q,
                           const std::vector<double>& b_u, const Eigen::Vector3d& b_p,
                           const Eigen::Vector2d& b_q, const std::vector<double>* c_u = nullptr) const;

  /// Banded d_u F (kl = ku = 5) from nine colour-compressed dual sweeps; also returns d_u J.
  BandedMatrix jacobian_u(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                          const Eigen::Vector2d& q, std::vector<double>* dJ_du = nullptr) const;

  /// Residual with SI continuity rows (used to check homogeneity in mu0).
  std::vector<double> evaluate_si_rows(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                       const Eigen::Vector2d& q) const;
  std::vector<double> directional_si_rows(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                          const Eigen::Vector2d& q, const Eigen::Vector3d& dp) const;

 private:
  template <class S>
  void run(const std::vector<S>& u, const std::array<S, 3>& p_hat, const std::array<S, 2>& q,
           std::vector<S>* F, S* J, RowScaling scaling, KinkMonitor* kinks) const;

  PhysicalParameters nominal_;
  FixedConstants c_;
  double V_;
  int N_;
  UpwindMode upwind_;
};

/// Derivatives of one converged operating point.
struct SensitivityBundle {
  OperatingPoint op;
  std::vector<double> u;            ///< reduced state
  Eigen::MatrixXd du_dp;            ///< N_u x 3
  Eigen::MatrixXd du_dq;            ///< N_u x 2
  std::array<Eigen::MatrixXd, kNumControls> d2u_dpdq;  ///< [l] is N_u x 3 for control l
  double J = 0.0;
  Eigen::Vector3d dJ_dp = Eigen::Vector3d::Zero();
  Eigen::Vector2d dJ_dq = Eigen::Vector2d::Zero();
  Eigen::Matrix<double, 3, 2> d2J_dpdq = Eigen::Matrix<double, 3, 2>::Zero();
  KinkMonitor kinks;           ///< clamp kinks met at the state (derivatives use the unclamped branch)
  double ift_residual = 0.0;   ///< max_k |d_u F du/dp_k + d_p F_k| / |d_p F_k| (column-wise relative)
  std::shared_ptr<const BandedLU> factorization;
};

struct SensitivityOptions {
  bool second_order = true;
  /// Test hook: multiplies every du/dp by (1 + corrupt_state_derivatives).
  double corrupt_state_derivatives = 0.0;
};

/**
 * Sensitivities of a converged state. Factorises d_u F once and reuses it for
 * the 3 + 2 first-order and 6 second-order right-hand sides. Throws
 * SingularMatrixError when d_u F is singular.
 */
SensitivityBundle state_sensitivities(const SolveResult& solution, const PhysicalParameters& nominal,
                                      const FixedConstants& c, const GummelSettings& s,
                                      const SensitivityOptions& opt = {});

/// Noise model sigma_i = a J_i + b [A/m^2].
struct MeasurementModel {
  double a = 0.1;
  double b = 0.1;
  double sigma(double J) const { return a * J + b; }
};

/// Scaled Jacobian block of one experiment and its control derivatives.
struct ExperimentJacobian {
  Eigen::MatrixXd jac;                                   ///< M_e x 3
  std::array<Eigen::MatrixXd, kNumControls> djac_dq;     ///< per control, M_e x 3
  Eigen::VectorXd J;                                     ///< simulated currents
};

/**
 * Jac = -Sigma^-1 dJ/dp_hat and its total derivative in (L, T), including the
 * dependence of Sigma on J. Requires bundles with second-order data when
 * with_control_derivatives is set.
 */
ExperimentJacobian measurement_jacobian(const std::vector<SensitivityBundle>& bundles,
                                        const MeasurementModel& noise, bool with_control_derivatives = true);

}  // namespace egdm
