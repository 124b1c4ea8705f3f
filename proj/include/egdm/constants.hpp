#pragma once

/**
 * @file constants.hpp
 * @brief Physical constants (CODATA 2018 exact values where defined).
 */

namespace egdm::constants {

inline constexpr double kB = 8.617333262e-5;           ///< Boltzmann constant [eV/K]
inline constexpr double e = 1.602176634e-19;           ///< elementary charge [A·s]
inline constexpr double pi = 3.141592653589793238462643;

}  // namespace egdm::constants
