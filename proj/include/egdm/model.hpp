#pragma once

/**
 * @file model.hpp
 * @brief Parameter, constant and control types of the EGDM device model.
 */

#include <vector>

#include "egdm/constants.hpp"

namespace egdm {

/// The unknown parameter triple p = (mu0, sigma, Nt).
struct PhysicalParameters {
  double mu0 = 0.0;    ///< zero-field mobility prefactor [m^2/(V s)]
  double sigma = 0.0;  ///< Gaussian DOS width [eV]
  double Nt = 0.0;     ///< site density [m^-3]

  double operator[](int k) const { return k == 0 ? mu0 : (k == 1 ? sigma : Nt); }
  double& operator[](int k) { return k == 0 ? mu0 : (k == 1 ? sigma : Nt); }
};

inline constexpr int kNumParameters = 3;

struct FixedConstants {
  double eps = 2.66e-11;  ///< permittivity [A s/(V m)]
  double phi1 = 0.0;      ///< injection barrier at x = 0 [eV]
  double phi2 = 0.0;      ///< barrier at x = L [eV]
  double kB = constants::kB;
  double e = constants::e;
};

/// One experiment: device length, temperature and the applied voltage series.
struct ExperimentControls {
  double L = 0.0;  ///< [m]
  double T = 0.0;  ///< [K]
  std::vector<double> voltages;
};

/// Throws ValidationError unless all fields are positive and finite.
void validate(const PhysicalParameters& p);
void validate(const FixedConstants& c);
/// Throws ValidationError on L, T <= 0 or a voltage list that is empty, non-positive or unsorted.
void validate(const ExperimentControls& q);

/// sigma / (kB T); throws ModelValidityError when it is not above 1.
double sigma_hat_checked(const PhysicalParameters& p, double T);

}  // namespace egdm
