/**
 * @file gauss_fermi.cpp
 * @brief Fermi-factor table and safeguarded inversion.
 */

#include "egdm/gauss_fermi.hpp"

#include <array>
#include <limits>
#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

namespace gf_detail {

namespace {
constexpr long kTableHalf = 2000;  // |x| <= 1000: beyond this f is 0 or 1 in double

const std::vector<double>& base_table() {
  static const std::vector<double> table = [] {
    std::vector<double> t(2 * kTableHalf + 1);
    for (long k = -kTableHalf; k <= kTableHalf; ++k) {
      const double x = static_cast<double>(k) * kBaseStep;
      t[k + kTableHalf] = x > 0.0 ? std::exp(-x) / (1.0 + std::exp(-x)) : 1.0 / (1.0 + std::exp(x));
    }
    return t;
  }();
  return table;
}
}  // namespace

double fermi_base(long k) {
  if (k > kTableHalf) return 0.0;
  if (k < -kTableHalf) return 1.0;
  return base_table()[k + kTableHalf];
}

void throw_window(double sigma_hat) {
  throw DomainError(fmt::format(
      "Gauss-Fermi quadrature: reduced width {} is outside the supported range", sigma_hat));
}

}  // namespace gf_detail

GaussFermiTable::GaussFermiTable(double sigma, double T) {
  if (!(sigma > 0.0) || !(T > 0.0))
    throw DomainError(fmt::format("Gauss-Fermi table needs sigma > 0 and T > 0 (got {}, {})", sigma, T));
  sigma_hat_ = sigma / (constants::kB * T);
}

GaussFermiTable::GaussFermiTable(double sigma_hat) : sigma_hat_(sigma_hat) {
  if (!(sigma_hat > 0.0)) throw DomainError("Gauss-Fermi table needs a positive reduced width");
}

double GaussFermiTable::invert(double n) const {
  // dilute-limit estimate
  const double guess = std::log(n) - 0.5 * sigma_hat_ * sigma_hat_;
  return invert(n, std::isfinite(guess) ? guess : 0.0);
}

double GaussFermiTable::invert(double n, double eta_guess) const {
  return invert_with_derivative(n, eta_guess).eta;
}

GaussFermiTable::Inversion GaussFermiTable::invert_with_derivative(double n, double eta_guess) const {
  if (!(n > 0.0) || !(n < 1.0))
    throw DomainError(fmt::format("cannot invert Gauss-Fermi statistics for n/Nt = {}", n));
  const double log_target = std::log(n);

  // density < exp(eta + s^2/2) everywhere, so this is a strict lower bound.
  // log density is concave and increasing in eta: Newton iterates started
  // anywhere land left of the root and then increase monotonically, so only
  // the lower bound needs safeguarding.
  double lo = log_target - 0.5 * sigma_hat_ * sigma_hat_;
  double hi = std::numeric_limits<double>::infinity();
  double eta = (eta_guess > lo && std::isfinite(eta_guess)) ? eta_guess : lo + 1.0;
  for (int it = 0; it < 200; ++it) {
    const auto v = evaluate(eta);
    const double r = std::log(v.n) - log_target;
    if (std::fabs(r) <= 1e-14) return {eta, v.n, v.dn};
    if (r < 0.0) lo = eta; else hi = eta;
    double next = eta - r * v.n / v.dn;
    if (!(next > lo && next < hi))
      next = std::isfinite(hi) ? 0.5 * (lo + hi) : lo + 2.0 * (1.0 + std::fabs(eta - lo));
    if (std::fabs(next - eta) <= 1e-15 * (1.0 + std::fabs(eta))) return {next, v.n, v.dn};
    eta = next;
  }
  throw ConvergenceError(fmt::format("Gauss-Fermi inversion did not converge for n/Nt = {}", n), 0.0, 200);
}

double gauss_fermi_density(double E_F, const PhysicalParameters& p, double T) {
  const GaussFermiTable gf(p.sigma, T);
  return p.Nt * gf.density(E_F / (constants::kB * T));
}

double gauss_fermi_density_derivative(double E_F, const PhysicalParameters& p, double T) {
  const GaussFermiTable gf(p.sigma, T);
  const double kT = constants::kB * T;
  return p.Nt * gf.evaluate(E_F / kT).dn / kT;
}

double invert_gauss_fermi(double n, const PhysicalParameters& p, double T) {
  if (!(p.Nt > 0.0)) throw DomainError("Nt must be positive");
  const GaussFermiTable gf(p.sigma, T);
  return constants::kB * T * gf.invert(n / p.Nt);
}

}  // namespace egdm
