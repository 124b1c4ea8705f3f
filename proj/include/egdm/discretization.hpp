#pragma once

/**
 * @file discretization.hpp
 * @brief Scharfetter-Gummel discretisation and the coupled discrete residual.
 *
 * Unknowns are interleaved per interior node i = 1..N-1 as
 * (n_i/Nt, phi_i/kT, E_F,i/kT), so the residual Jacobian is banded with five
 * sub- and super-diagonals. Row triplets per node are
 *
 *   continuity  (J_i - J_{i-1}) / (sum of the four drift/diffusion terms)
 *   Poisson     (phi_{i+1} - 2 phi_i + phi_{i-1} - lambda n_i / N^2) / (2 + lambda / N^2)
 *   statistics  n_i - GF(E_F,i)
 *
 * with J_k the reduced flux of interval k (between nodes k and k+1). The
 * potential phi is the electrostatic energy scale in which carriers drift
 * towards larger phi, so the space charge enters as phi'' = +lambda n.
 *
 * Everything is templated on the scalar so that dual numbers in u, p or q
 * produce exact directional derivatives.
 */

#include <cmath>
#include <vector>

#include "egdm/bernoulli.hpp"
#include "egdm/boundary.hpp"
#include "egdm/dual.hpp"
#include "egdm/gauss_fermi.hpp"
#include "egdm/mobility.hpp"
#include "egdm/model.hpp"

namespace egdm {

/// How interval averages of g1 and g3 pick their node.
enum class UpwindMode {
  Logistic,  ///< weight 1/(1 + exp(-dphi/kT)) on the left node; smooth in the state
  Strict     ///< left node iff phi_{k+1} >= phi_k
};

enum class RowScaling {
  Relative,  ///< continuity rows divided by the local drift/diffusion magnitude
  SI         ///< continuity rows are J_i - J_{i-1} in A/m^2
};

inline constexpr int kFieldsPerNode = 3;

/// Reduced coefficients of one (p, q, V) operating point on an N-interval mesh.
template <class S>
struct DiscreteCoefficients {
  int N = 0;
  S kT, sigma_hat, g0, J0, lambda;
  S field_scale;  ///< |dphi_red| -> reduced field argument of g2
  S grad_scale;   ///< dphi_red -> d_x phi [eV/m]
  S image_coeff;  ///< e / (4 pi eps)
  S phi_N, eta_N, eta0_base;
  UpwindMode upwind = UpwindMode::Logistic;
};

template <class S>
DiscreteCoefficients<S> make_coefficients(const S& mu0, const S& sigma, const S& Nt, const S& L,
                                          const S& T, double V, const FixedConstants& c, int N,
                                          UpwindMode mode = UpwindMode::Logistic) {
  using std::pow;
  DiscreteCoefficients<S> cf;
  cf.N = N;
  cf.upwind = mode;
  cf.kT = c.kB * T;
  cf.sigma_hat = sigma / cf.kT;
  cf.g0 = g0_factor(cf.sigma_hat);
  cf.J0 = c.e * mu0 * cf.g0 * Nt * cf.kT / L;
  cf.lambda = c.e * Nt * L * L / (c.eps * cf.kT);
  cf.field_scale = static_cast<double>(N) / (cf.sigma_hat * L * pow(Nt, 1.0 / 3.0));
  cf.grad_scale = cf.kT * static_cast<double>(N) / L;
  cf.image_coeff = S(image_force_coefficient(c));
  cf.phi_N = (V - (c.phi2 - c.phi1)) / cf.kT;
  cf.eta_N = S(-c.phi2) / cf.kT;
  cf.eta0_base = S(-c.phi1) / cf.kT;
  return cf;
}

inline DiscreteCoefficients<double> make_coefficients(const PhysicalParameters& p, double L, double T,
                                                      double V, const FixedConstants& c, int N,
                                                      UpwindMode mode = UpwindMode::Logistic) {
  return make_coefficients<double>(p.mu0, p.sigma, p.Nt, L, T, V, c, N, mode);
}

/// Weight of the left node in an interval average.
template <class S>
S upwind_weight(const S& dphi_red, UpwindMode mode) {
  using std::tanh;
  if (mode == UpwindMode::Strict) return S(value_of(dphi_red) >= 0.0 ? 1.0 : 0.0);
  return 0.5 * (1.0 + tanh(0.5 * dphi_red));
}

/// Interval flux in the form J_red = a n_k - b n_{k+1}.
template <class S>
struct SGCoefficients {
  S a, b;
  S g1, g2, g3;  ///< the averaged factors
};

template <class S>
SGCoefficients<S> sg_coefficients(const S& dphi_red, const S& g1_left, const S& g1_right,
                                  const S& g3_left, const S& g3_right, const S& field_scale,
                                  const S& sigma_hat, int N, UpwindMode mode,
                                  KinkMonitor* kinks = nullptr) {
  using std::abs;
  const S w = upwind_weight(dphi_red, mode);
  SGCoefficients<S> out;
  out.g1 = w * g1_left + (1.0 - w) * g1_right;
  out.g3 = w * g3_left + (1.0 - w) * g3_right;
  out.g2 = g2_factor(abs(dphi_red) * field_scale, sigma_hat, kinks);
  const S pref = out.g1 * out.g2 * out.g3 * static_cast<double>(N);
  const S z = dphi_red / out.g3;
  out.a = pref * bernoulli(-z);
  out.b = pref * bernoulli(z);
  return out;
}

/// Reduced quantities needed at one node.
template <class S>
struct NodeFactors {
  S g1, g3;
};

template <class S>
NodeFactors<S> node_factors(const S& n_red, const S& dn_deta, const S& sigma_hat,
                            KinkMonitor* kinks = nullptr) {
  return {g1_factor(n_red, sigma_hat, kinks), g3_factor(n_red, dn_deta)};
}

/// Contact values derived from the interior state.
template <class S>
struct ContactValues {
  S n0, eta0, dn0;
  S nN, etaN, dnN;
};

template <class S>
ContactValues<S> contact_values(const DiscreteCoefficients<S>& cf, const S& phi1_red,
                                KinkMonitor* kinks = nullptr) {
  // field argument of the lowering is -d_x phi(0) from the one-sided difference
  const S grad = -(phi1_red * cf.grad_scale);
  const S lowering = image_force_lowering(cf.image_coeff * grad, kinks) / cf.kT;
  ContactValues<S> cv;
  cv.eta0 = cf.eta0_base + lowering;
  const auto g0v = gauss_fermi_reduced(cv.eta0, cf.sigma_hat);
  cv.n0 = g0v.n;
  cv.dn0 = g0v.dn;
  cv.etaN = cf.eta_N;
  const auto gNv = gauss_fermi_reduced(cv.etaN, cf.sigma_hat);
  cv.nN = gNv.n;
  cv.dnN = gNv.dn;
  return cv;
}

/**
 * Coupled residual F(u) and the measured current (interval N/2, in A/m^2).
 * u and F have 3(N-1) entries. Either output pointer may be null.
 */
template <class S>
void discrete_residual(const DiscreteCoefficients<S>& cf, const std::vector<S>& u, std::vector<S>* F,
                       S* J_mid, RowScaling scaling = RowScaling::Relative,
                       KinkMonitor* kinks = nullptr, std::vector<S>* interval_flux = nullptr) {
  const int N = cf.N;
  const auto n_at = [&](int i) -> const S& { return u[kFieldsPerNode * (i - 1)]; };
  const auto phi_at = [&](int i) -> const S& { return u[kFieldsPerNode * (i - 1) + 1]; };
  const auto eta_at = [&](int i) -> const S& { return u[kFieldsPerNode * (i - 1) + 2]; };

  const ContactValues<S> cv = contact_values(cf, phi_at(1), kinks);

  std::vector<S> nn(N + 1), phi(N + 1), g1(N + 1), g3(N + 1), gf_n(N + 1);
  nn[0] = cv.n0;
  nn[N] = cv.nN;
  phi[0] = S(0.0);
  phi[N] = cf.phi_N;
  {
    const auto f0 = node_factors(cv.n0, cv.dn0, cf.sigma_hat, kinks);
    const auto fN = node_factors(cv.nN, cv.dnN, cf.sigma_hat, kinks);
    g1[0] = f0.g1;
    g3[0] = f0.g3;
    g1[N] = fN.g1;
    g3[N] = fN.g3;
  }
  for (int i = 1; i < N; ++i) {
    nn[i] = n_at(i);
    phi[i] = phi_at(i);
    const auto gf = gauss_fermi_reduced(eta_at(i), cf.sigma_hat);
    gf_n[i] = gf.n;
    const auto nf = node_factors(nn[i], gf.dn, cf.sigma_hat, kinks);
    g1[i] = nf.g1;
    g3[i] = nf.g3;
  }

  std::vector<S> drift(N), diffusion(N), J(N);
  for (int k = 0; k < N; ++k) {
    const auto sg = sg_coefficients(S(phi[k + 1] - phi[k]), g1[k], g1[k + 1], g3[k], g3[k + 1],
                                    cf.field_scale, cf.sigma_hat, N, cf.upwind, kinks);
    drift[k] = sg.a * nn[k];
    diffusion[k] = sg.b * nn[k + 1];
    J[k] = drift[k] - diffusion[k];
  }
  if (J_mid) *J_mid = cf.J0 * J[N / 2];
  if (interval_flux) {
    interval_flux->resize(N);
    for (int k = 0; k < N; ++k) (*interval_flux)[k] = cf.J0 * J[k];
  }
  if (!F) return;

  F->resize(static_cast<std::size_t>(kFieldsPerNode) * (N - 1));
  const S lam_h2 = cf.lambda / (static_cast<double>(N) * N);
  const S pois_scale = 1.0 / (2.0 + lam_h2);
  for (int i = 1; i < N; ++i) {
    S cont = J[i] - J[i - 1];
    if (scaling == RowScaling::Relative)
      cont /= drift[i] + diffusion[i] + drift[i - 1] + diffusion[i - 1];
    else
      cont *= cf.J0;
    const int r = kFieldsPerNode * (i - 1);
    (*F)[r] = cont;
    (*F)[r + 1] = (phi[i + 1] - 2.0 * phi[i] + phi[i - 1] - lam_h2 * nn[i]) * pois_scale;
    (*F)[r + 2] = nn[i] - gf_n[i];
  }
}

/**
 * SI Scharfetter-Gummel flux [A/m^2] between two nodes for given averaged
 * factors. phi in eV, n in m^-3, h in m.
 */
double sg_flux(double n_i, double n_ip1, double phi_i, double phi_ip1, double g1_avg,
               double g2_avg, double g3_avg, const PhysicalParameters& p, double T, double h);

struct AveragedFactors {
  std::vector<double> g1, g2, g3;  ///< one entry per interval
};

/**
 * Interval averages of the mobility factors for SI node vectors that include
 * both contacts (N+1 entries each).
 */
AveragedFactors average_factors(const std::vector<double>& n, const std::vector<double>& phi,
                                const std::vector<double>& E_F, const PhysicalParameters& p,
                                double T, double h, UpwindMode mode = UpwindMode::Strict);

}  // namespace egdm
