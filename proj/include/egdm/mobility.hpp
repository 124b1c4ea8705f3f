#pragma once

/**
 * @file mobility.hpp
 * @brief EGDM mobility enhancement factors g0..g3.
 *
 * The factors are written in reduced variables (sigma_hat = sigma/kB T,
 * n/Nt, field normalised by Nt^(1/3) sigma) and templated so the same code
 * serves the solver and the dual-number derivative path. Clamps use the
 * unclamped branch at the kink itself.
 */

#include <cmath>

#include "egdm/dual.hpp"
#include "egdm/errors.hpp"
#include "egdm/model.hpp"

namespace egdm {

/// Counts evaluations that landed on (or within 1e-12 of) a clamp kink.
struct KinkMonitor {
  int density_clamp = 0;
  int field_clamp = 0;
  int image_force = 0;
  // evaluations on the constant branch; a change between nearby states means a kink was crossed
  int density_clamped = 0;
  int field_clamped = 0;
  int lowering_off = 0;
  bool any() const { return density_clamp + field_clamp + image_force > 0; }
  int clamped() const { return density_clamped + field_clamped + lowering_off; }
};

inline constexpr double kDensityClamp = 0.2;  // bound on 2 n / Nt in g1
inline constexpr double kFieldClamp = 2.0;    // bound on the normalised field in g2

template <class S>
S g0_factor(const S& sigma_hat) {
  using std::exp;
  return exp(-0.42 * sigma_hat * sigma_hat);
}

/// Exponent delta(sigma_hat); requires sigma_hat > 1.
template <class S>
S delta_exponent(const S& sigma_hat) {
  using std::log;
  const double sv = value_of(sigma_hat);
  if (!(sv > 1.0))
    throw ModelValidityError("EGDM density exponent undefined for sigma/(kB T) <= 1");
  return 2.0 * (log(sigma_hat * sigma_hat - sigma_hat) - std::log(std::log(4.0))) /
         (sigma_hat * sigma_hat);
}

/// Density enhancement; n_red = n / Nt.
template <class S>
S g1_factor(const S& n_red, const S& sigma_hat, KinkMonitor* kinks = nullptr) {
  using std::exp;
  using std::log;
  S x = 2.0 * n_red;
  const double xv = value_of(x);
  if (kinks && std::fabs(xv - kDensityClamp) <= 1e-12 * kDensityClamp) ++kinks->density_clamp;
  if (xv > kDensityClamp) {
    x = S(kDensityClamp);
    if (kinks) ++kinks->density_clamped;
  }
  const S delta = delta_exponent(sigma_hat);
  return exp(0.5 * (sigma_hat * sigma_hat - sigma_hat) * exp(delta * log(x)));
}

/// Field enhancement; field_red = |d_x phi| / (Nt^(1/3) sigma), taken >= 0.
template <class S>
S g2_factor(const S& field_red, const S& sigma_hat, KinkMonitor* kinks = nullptr) {
  using std::exp;
  using std::sqrt;
  S f = field_red;
  const double fv = value_of(f);
  if (kinks && std::fabs(fv - kFieldClamp) <= 1e-12 * kFieldClamp) ++kinks->field_clamp;
  if (fv > kFieldClamp) {
    f = S(kFieldClamp);
    if (kinks) ++kinks->field_clamped;
  }
  const S s15 = sigma_hat * sqrt(sigma_hat);
  return exp(0.44 * (s15 - 2.2) * (sqrt(1.0 + 0.8 * f * f) - 1.0));
}

/// Generalised Einstein factor from reduced density and its eta-derivative.
template <class S>
S g3_factor(const S& n_red, const S& dn_deta) {
  return n_red / dn_deta;
}

struct MobilityFactors {
  double g0, g1, g2, g3;
};

/**
 * All four factors in SI inputs: n [m^-3], grad_phi [eV/m], E_F [eV], T [K].
 * Throws ModelValidityError for sigma/(kB T) <= 1 and DomainError for n
 * outside (0, Nt).
 */
MobilityFactors mobility_factors(double n, double grad_phi, double E_F, const PhysicalParameters& p,
                                 double T);

}  // namespace egdm
