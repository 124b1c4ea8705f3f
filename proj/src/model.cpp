/**
 * @file model.cpp
 * @brief Input validation for the model types.
 */

#include "egdm/model.hpp"

#include <cmath>
#include <fmt/format.h>

#include "egdm/errors.hpp"

namespace egdm {

namespace {
bool positive(double x) { return std::isfinite(x) && x > 0.0; }
}  // namespace

void validate(const PhysicalParameters& p) {
  if (!positive(p.mu0) || !positive(p.sigma) || !positive(p.Nt))
    throw ValidationError(fmt::format("parameters must be positive (mu0={}, sigma={}, Nt={})",
                                      p.mu0, p.sigma, p.Nt));
}

void validate(const FixedConstants& c) {
  if (!positive(c.eps)) throw ValidationError("permittivity must be positive");
  if (!(c.phi1 >= 0.0) || !(c.phi2 >= 0.0)) throw ValidationError("barriers must be non-negative");
  if (!positive(c.kB) || !positive(c.e)) throw ValidationError("kB and e must be positive");
}

void validate(const ExperimentControls& q) {
  if (!positive(q.L)) throw ValidationError(fmt::format("device length must be positive, got {}", q.L));
  if (!positive(q.T)) throw ValidationError(fmt::format("temperature must be positive, got {}", q.T));
  if (q.voltages.empty()) throw ValidationError("voltage list is empty");
  for (std::size_t i = 0; i < q.voltages.size(); ++i) {
    if (!positive(q.voltages[i]))
      throw ValidationError(fmt::format("voltage {} is not positive", q.voltages[i]));
    if (i > 0 && !(q.voltages[i] > q.voltages[i - 1]))
      throw ValidationError("voltages must be strictly increasing");
  }
}

double sigma_hat_checked(const PhysicalParameters& p, double T) {
  const double sh = p.sigma / (constants::kB * T);
  if (!(sh > 1.0))
    throw ModelValidityError(
        fmt::format("sigma/(kB T) = {} must exceed 1 (sigma={} eV, T={} K)", sh, p.sigma, T));
  return sh;
}

}  // namespace egdm
