/**
 * @file sensitivity.cpp
 * @brief Dual-number residual derivatives and implicit-function sensitivities.
 */

#include "egdm/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

ResidualSystem::ResidualSystem(const PhysicalParameters& nominal, const FixedConstants& c, double V,
                               int N, UpwindMode upwind)
    : nominal_(nominal), c_(c), V_(V), N_(N), upwind_(upwind) {
  validate(nominal);
  if (N < 4) throw ValidationError("mesh needs N >= 4");
}

template <class S>
void ResidualSystem::run(const std::vector<S>& u, const std::array<S, 3>& p_hat, const std::array<S, 2>& q,
                         std::vector<S>* F, S* J, RowScaling scaling, KinkMonitor* kinks) const {
  if (static_cast<int>(u.size()) != unknowns()) throw DomainError("residual: state size does not match mesh");
  const S mu0 = nominal_.mu0 * p_hat[0];
  const S sigma = nominal_.sigma * p_hat[1];
  const S Nt = nominal_.Nt * p_hat[2];
  const auto cf = make_coefficients<S>(mu0, sigma, Nt, q[0], q[1], V_, c_, N_, upwind_);
  discrete_residual<S>(cf, u, F, J, scaling, kinks);
}

namespace {

template <class S>
std::array<S, 3> lift3(const Eigen::Vector3d& v, const Eigen::Vector3d& dv) {
  return {S(v[0], dv[0]), S(v[1], dv[1]), S(v[2], dv[2])};
}
template <class S>
std::array<S, 2> lift2(const Eigen::Vector2d& v, const Eigen::Vector2d& dv) {
  return {S(v[0], dv[0]), S(v[1], dv[1])};
}

}  // namespace

ResidualSystem::Value ResidualSystem::evaluate(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                               const Eigen::Vector2d& q, KinkMonitor* kinks) const {
  Value out;
  run<double>(u, {p_hat[0], p_hat[1], p_hat[2]}, {q[0], q[1]}, &out.F, &out.J, RowScaling::Relative, kinks);
  return out;
}

ResidualSystem::Value ResidualSystem::directional(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                                  const Eigen::Vector2d& q, const std::vector<double>& du,
                                                  const Eigen::Vector3d& dp, const Eigen::Vector2d& dq) const {
  const std::size_t n = u.size();
  if (du.size() != n) throw DomainError("directional: direction size");
  std::vector<Dual1> ud(n);
  for (std::size_t j = 0; j < n; ++j) ud[j] = Dual1(u[j], du[j]);
  std::vector<Dual1> F;
  Dual1 J;
  run<Dual1>(ud, lift3<Dual1>(p_hat, dp), lift2<Dual1>(q, dq), &F, &J, RowScaling::Relative, nullptr);
  Value out;
  out.F.resize(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) out.F[i] = F[i].d;
  out.J = J.d;
  return out;
}

ResidualSystem::Value ResidualSystem::second_directional(
    const std::vector<double>& u, const Eigen::Vector3d& p_hat, const Eigen::Vector2d& q,
    const std::vector<double>& a_u, const Eigen::Vector3d& a_p, const Eigen::Vector2d& a_q,
    const std::vector<double>& b_u, const Eigen::Vector3d& b_p, const Eigen::Vector2d& b_q,
    const std::vector<double>* c_u) const {
  const std::size_t n = u.size();
  if (a_u.size() != n || b_u.size() != n || (c_u && c_u->size() != n))
    throw DomainError("second_directional: direction size");
  std::vector<Dual2> ud(n);
  for (std::size_t j = 0; j < n; ++j) ud[j] = make_hyper(u[j], a_u[j], b_u[j], c_u ? (*c_u)[j] : 0.0);
  std::array<Dual2, 3> pd;
  for (int k = 0; k < 3; ++k) pd[k] = make_hyper(p_hat[k], a_p[k], b_p[k], 0.0);
  std::array<Dual2, 2> qd;
  for (int l = 0; l < 2; ++l) qd[l] = make_hyper(q[l], a_q[l], b_q[l], 0.0);
  std::vector<Dual2> F;
  Dual2 J;
  run<Dual2>(ud, pd, qd, &F, &J, RowScaling::Relative, nullptr);
  Value out;
  out.F.resize(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) out.F[i] = parts(F[i]).d_mixed;
  out.J = parts(J).d_mixed;
  return out;
}

BandedMatrix ResidualSystem::jacobian_u(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                        const Eigen::Vector2d& q, std::vector<double>* dJ_du) const {
  constexpr int kColours = 3 * kFieldsPerNode;  // a row touches three consecutive nodes
  constexpr int kBand = 2 * kFieldsPerNode - 1;
  const int n = unknowns();
  BandedMatrix A(n, kBand, kBand);
  if (dJ_du) dJ_du->assign(n, 0.0);
  const int jlo = kFieldsPerNode * (N_ / 2 - 1);
  const int jhi = std::min(n - 1, kFieldsPerNode * (N_ / 2) + kFieldsPerNode - 1);

  std::vector<Dual1> ud(n);
  std::vector<Dual1> F;
  Dual1 J;
  const std::array<Dual1, 3> pd{Dual1(p_hat[0]), Dual1(p_hat[1]), Dual1(p_hat[2])};
  const std::array<Dual1, 2> qd{Dual1(q[0]), Dual1(q[1])};
  for (int colour = 0; colour < kColours; ++colour) {
    for (int j = 0; j < n; ++j) ud[j] = Dual1(u[j], j % kColours == colour ? 1.0 : 0.0);
    run<Dual1>(ud, pd, qd, &F, &J, RowScaling::Relative, nullptr);
    for (int i = 0; i < n; ++i) {
      const int node = i / kFieldsPerNode;
      const int lo = std::max(0, kFieldsPerNode * (node - 1));
      const int hi = std::min(n - 1, kFieldsPerNode * (node + 1) + kFieldsPerNode - 1);
      int j = lo + ((colour - lo % kColours) + kColours) % kColours;
      if (j <= hi) A.at(i, j) = F[i].d;
    }
    if (dJ_du) {
      const int j = jlo + ((colour - jlo % kColours) + kColours) % kColours;
      if (j <= jhi) (*dJ_du)[j] = J.d;
    }
  }
  return A;
}

std::vector<double> ResidualSystem::evaluate_si_rows(const std::vector<double>& u, const Eigen::Vector3d& p_hat,
                                                     const Eigen::Vector2d& q) const {
  std::vector<double> F;
  run<double>(u, {p_hat[0], p_hat[1], p_hat[2]}, {q[0], q[1]}, &F, nullptr, RowScaling::SI, nullptr);
  return F;
}

std::vector<double> ResidualSystem::directional_si_rows(const std::vector<double>& u,
                                                        const Eigen::Vector3d& p_hat, const Eigen::Vector2d& q,
                                                        const Eigen::Vector3d& dp) const {
  std::vector<Dual1> ud(u.begin(), u.end());
  std::vector<Dual1> F;
  run<Dual1>(ud, lift3<Dual1>(p_hat, dp), lift2<Dual1>(q, Eigen::Vector2d::Zero()), &F, nullptr,
             RowScaling::SI, nullptr);
  std::vector<double> out(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) out[i] = F[i].d;
  return out;
}

namespace {

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SensitivityBundle state_sensitivities(const SolveResult& solution, const PhysicalParameters& nominal,
                                      const FixedConstants& c, const GummelSettings& s,
                                      const SensitivityOptions& opt) {
  const int N = solution.state.intervals();
  const ResidualSystem sys(nominal, c, solution.op.V, N, s.upwind);
  const int n = sys.unknowns();
  const Eigen::Vector3d p_hat = Eigen::Vector3d::Ones();
  const Eigen::Vector2d q(solution.op.L, solution.op.T);
  const std::vector<double> zero_u(n, 0.0);

  SensitivityBundle b;
  b.op = solution.op;
  b.u = solution.u;
  const auto val = sys.evaluate(b.u, p_hat, q, &b.kinks);
  b.J = val.J;

  std::vector<double> dJ_du;
  const BandedMatrix A = sys.jacobian_u(b.u, p_hat, q, &dJ_du);
  auto lu = std::make_shared<const BandedLU>(A);
  b.factorization = lu;

  b.du_dp.resize(n, 3);
  for (int k = 0; k < 3; ++k) {
    const auto d = sys.directional(b.u, p_hat, q, zero_u, Eigen::Vector3d::Unit(k), Eigen::Vector2d::Zero());
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = -d.F[i];
    lu->solve_in_place(x);
    const auto Ax = A.multiply(x);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      num = std::max(num, std::fabs(Ax[i] + d.F[i]));
      den = std::max(den, std::fabs(d.F[i]));
    }
    if (den > 0.0) b.ift_residual = std::max(b.ift_residual, num / den);
    for (int i = 0; i < n; ++i) x[i] *= 1.0 + opt.corrupt_state_derivatives;
    b.du_dp.col(k) = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    b.dJ_dp[k] = d.J + dot(dJ_du, x);
  }

  b.du_dq.resize(n, kNumControls);
  for (int l = 0; l < kNumControls; ++l) {
    const auto d = sys.directional(b.u, p_hat, q, zero_u, Eigen::Vector3d::Zero(), Eigen::Vector2d::Unit(l));
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = -d.F[i];
    lu->solve_in_place(x);
    b.du_dq.col(l) = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
    b.dJ_dq[l] = d.J + dot(dJ_du, x);
  }

  if (opt.second_order) {
    for (int l = 0; l < kNumControls; ++l) {
      b.d2u_dpdq[l].resize(n, 3);
      const auto dq_u = to_std(b.du_dq.col(l));
      for (int k = 0; k < 3; ++k) {
        const auto dp_u = to_std(b.du_dp.col(k));
        // all four second-order terms of the differentiated identity in one sweep
        const auto m = sys.second_directional(b.u, p_hat, q, dp_u, Eigen::Vector3d::Unit(k),
                                              Eigen::Vector2d::Zero(), dq_u, Eigen::Vector3d::Zero(),
                                              Eigen::Vector2d::Unit(l));
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = -m.F[i];
        lu->solve_in_place(x);
        b.d2u_dpdq[l].col(k) = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        b.d2J_dpdq(k, l) = m.J + dot(dJ_du, x);
      }
    }
  }
  return b;
}

ExperimentJacobian measurement_jacobian(const std::vector<SensitivityBundle>& bundles,
                                        const MeasurementModel& noise, bool with_control_derivatives) {
  const int M = static_cast<int>(bundles.size());
  ExperimentJacobian out;
  out.jac.resize(M, 3);
  out.J.resize(M);
  for (auto& d : out.djac_dq) d = Eigen::MatrixXd::Zero(M, 3);
  for (int m = 0; m < M; ++m) {
    const auto& b = bundles[m];
    const double sig = noise.sigma(b.J);
    if (!(sig > 0.0)) throw DomainError(fmt::format("noise model gives sigma = {} for J = {}", sig, b.J));
    out.J[m] = b.J;
    out.jac.row(m) = -b.dJ_dp.transpose() / sig;
    if (!with_control_derivatives) continue;
    if (b.d2u_dpdq[0].size() == 0) throw DomainError("measurement_jacobian: bundle lacks second-order data");
    for (int l = 0; l < kNumControls; ++l) {
      const double dsig = noise.a * b.dJ_dq[l];
      out.djac_dq[l].row(m) = (-b.d2J_dpdq.col(l) / sig + b.dJ_dp * (dsig / (sig * sig))).transpose();
    }
  }
  return out;
}

}  // namespace egdm
