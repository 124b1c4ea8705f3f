/**
 * @file scaling.cpp
 * @brief Reduced unit system.
 */

#include "egdm/scaling.hpp"

#include <cmath>
#include <functional>
#include <fmt/format.h>

#include "egdm/errors.hpp"
#include "egdm/mobility.hpp"

namespace egdm {

Mesh::Mesh(int n, double length) : N(n), L(length) {
  if (n < 4) throw ValidationError(fmt::format("mesh needs at least 4 subintervals, got {}", n));
  if (!(length > 0.0)) throw ValidationError("mesh length must be positive");
}

namespace {
template <class F>
DeviceState map_state(const DeviceState& s, F density, F energy) {
  DeviceState out = s;
  for (auto& v : out.n) v = density(v);
  for (auto& v : out.phi) v = energy(v);
  for (auto& v : out.E_F) v = energy(v);
  out.n0 = density(s.n0);
  out.nL = density(s.nL);
  out.phi0 = energy(s.phi0);
  out.phiL = energy(s.phiL);
  out.EF0 = energy(s.EF0);
  out.EFL = energy(s.EFL);
  return out;
}
}  // namespace

DeviceState ScaledSystem::to_reduced(const DeviceState& si) const {
  const double Nt_ = Nt, kT_ = kT;
  auto dens = [Nt_](double v) { return v / Nt_; };
  auto en = [kT_](double v) { return v / kT_; };
  return map_state<std::function<double(double)>>(si, dens, en);
}

DeviceState ScaledSystem::to_si(const DeviceState& reduced) const {
  const double Nt_ = Nt, kT_ = kT;
  auto dens = [Nt_](double v) { return v * Nt_; };
  auto en = [kT_](double v) { return v * kT_; };
  return map_state<std::function<double(double)>>(reduced, dens, en);
}

ScaledSystem nondimensionalize(const PhysicalParameters& p, const ExperimentControls& q,
                               const FixedConstants& c) {
  validate(p);
  validate(c);
  if (!(q.L > 0.0) || !(q.T > 0.0)) throw ValidationError("L and T must be positive");
  ScaledSystem s;
  s.L = q.L;
  s.kT = c.kB * q.T;
  s.Nt = p.Nt;
  s.sigma_hat = p.sigma / s.kT;
  s.g0 = g0_factor(s.sigma_hat);
  s.J0 = c.e * p.mu0 * s.g0 * p.Nt * s.kT / q.L;
  s.lambda = c.e * p.Nt * q.L * q.L / (c.eps * s.kT);
  return s;
}

}  // namespace egdm
