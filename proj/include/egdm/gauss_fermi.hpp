#pragma once

/**
 * @file gauss_fermi.hpp
 * @brief Gauss-Fermi carrier statistics.
 *
 * In reduced variables (energies over kB T, density over Nt) the integral is
 *
 *   n(eta) = 1/(sqrt(2 pi) s) * Int exp(-y^2 / (2 s^2)) / (1 + exp(y - eta)) dy,
 *
 * with s = sigma/(kB T). It is evaluated with a trapezoid rule whose nodes
 * sit at y = eta + k h, so the Fermi factor is sampled at the fixed points
 * x = k h and only the Gaussian moves with eta. Both factors are analytic in
 * a strip around the real axis, so the rule converges geometrically in 1/h;
 * h = min(0.5, s/3) keeps the discretisation error below 1e-15 relative.
 * The sum is truncated to y in [-s^2 - 9 s, 10 s], which covers both the
 * degenerate peak (near y = 0) and the Boltzmann peak (near y = -s^2).
 */

#include <cmath>
#include <vector>

#include "egdm/dual.hpp"
#include "egdm/model.hpp"

namespace egdm {

template <class S>
struct GFValue {
  S n;   ///< reduced density n / Nt
  S dn;  ///< d(n/Nt) / d(eta)
};

namespace gf_detail {

inline constexpr double kLowerSigmas = 9.0;
inline constexpr double kUpperSigmas = 10.0;
inline constexpr double kBaseStep = 0.5;
inline constexpr long kMaxNodes = 200000;

/// Step of the rule for a given reduced width.
inline double step_for(double sigma_hat) { return std::fmin(kBaseStep, sigma_hat / 3.0); }

/// 1/(1 + exp(k h)) for the base step, tabulated.
double fermi_base(long k);

inline double fermi_at(long k, double h) {
  if (h == kBaseStep) return fermi_base(k);
  const double x = static_cast<double>(k) * h;
  return x > 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
}

[[noreturn]] void throw_window(double sigma_hat);

}  // namespace gf_detail

/**
 * Reduced density and its eta-derivative. Works for double and nested Dual
 * scalars in both arguments; node placement follows value_of().
 */
template <class S>
GFValue<S> gauss_fermi_reduced(const S& eta, const S& sigma_hat, bool with_derivative = true) {
  using std::exp;
  using std::sqrt;
  const double sv = value_of(sigma_hat);
  const double ev = value_of(eta);
  const double h = gf_detail::step_for(sv);
  const double ylo = -sv * sv - gf_detail::kLowerSigmas * sv;
  const double yhi = gf_detail::kUpperSigmas * sv;
  const long k0 = static_cast<long>(std::ceil((ylo - ev) / h));
  const long k1 = static_cast<long>(std::floor((yhi - ev) / h));
  if (!(sv > 0.0) || !std::isfinite(ev) || k1 - k0 > gf_detail::kMaxNodes)
    gf_detail::throw_window(sv);

  const S inv2s2 = 1.0 / (2.0 * sigma_hat * sigma_hat);
  S y = eta + static_cast<double>(k0) * h;
  S g = exp(-(y * y) * inv2s2);
  S ratio = exp(-(2.0 * h * y + h * h) * inv2s2);
  const S q = exp(-(2.0 * h * h) * inv2s2);
  S sum(0.0);
  S sum_y(0.0);
  for (long k = k0; k <= k1; ++k) {
    const double f = gf_detail::fermi_at(k, h);
    const S gf = g * f;
    sum += gf;
    if (with_derivative) sum_y += y * gf;
    y += h;
    if (((k - k0 + 1) & 7) == 0) {
      // re-anchor: the two-term recurrence drifts by ~1 ulp per step
      y = eta + static_cast<double>(k + 1) * h;
      g = exp(-(y * y) * inv2s2);
      ratio = exp(-(2.0 * h * y + h * h) * inv2s2);
    } else {
      g *= ratio;
      ratio *= q;
    }
  }
  const S norm = h / (std::sqrt(2.0 * constants::pi) * sigma_hat);
  GFValue<S> out{norm * sum, S(0.0)};
  if (with_derivative) out.dn = -(norm * sum_y) / (sigma_hat * sigma_hat);
  return out;
}

/**
 * Reduced-unit Gauss-Fermi statistics for one (sigma, T) pair.
 * Immutable after construction.
 */
class GaussFermiTable {
 public:
  /// sigma [eV], T [K]; throws DomainError unless both are positive.
  GaussFermiTable(double sigma, double T);
  explicit GaussFermiTable(double sigma_hat);

  double sigma_hat() const noexcept { return sigma_hat_; }
  double step() const noexcept { return gf_detail::step_for(sigma_hat_); }

  double density(double eta) const { return gauss_fermi_reduced(eta, sigma_hat_, false).n; }
  GFValue<double> evaluate(double eta) const { return gauss_fermi_reduced(eta, sigma_hat_, true); }

  /**
   * eta with density(eta) = n to relative 1e-13. Newton on log n, safeguarded
   * by a bisection bracket. Throws DomainError for n outside (0, 1) and
   * ConvergenceError if the iteration budget is exhausted.
   */
  double invert(double n, double eta_guess) const;
  double invert(double n) const;

  struct Inversion {
    double eta, n, dn;  ///< n and dn evaluated at (or within one roundoff step of) eta
  };
  Inversion invert_with_derivative(double n, double eta_guess) const;

 private:
  double sigma_hat_;
};

/// Carrier density [m^-3] at quasi-Fermi energy E_F [eV].
double gauss_fermi_density(double E_F, const PhysicalParameters& p, double T);
/// dn/dE_F [m^-3 / eV].
double gauss_fermi_density_derivative(double E_F, const PhysicalParameters& p, double T);
/// Inverse of gauss_fermi_density, returns E_F [eV].
double invert_gauss_fermi(double n, const PhysicalParameters& p, double T);

}  // namespace egdm
