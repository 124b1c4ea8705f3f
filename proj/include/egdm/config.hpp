#pragma once

/**
 * @file config.hpp
 * @brief INI run configuration for the command-line front end.
 *
 * Lengths are given in nm and temperatures in K; everything is converted to SI
 * on load. Unknown sections or keys are rejected so typos do not silently fall
 * back to defaults.
 */

#include <string>
#include <vector>

#include "egdm/model.hpp"
#include "egdm/oed.hpp"

namespace egdm {

struct RunConfig {
  PhysicalParameters parameters;
  FixedConstants constants;
  DesignVector design;
  std::vector<double> voltages;
  OedSettings oed;
  DesignBounds bounds;
  OptimizerOptions optimizer;
  std::string output_directory = ".";

  /// Cross-checks every block; throws ValidationError.
  void validate() const;
};

/// Parses INI text. `origin` only labels error messages.
RunConfig parse_config(const std::string& text, const std::string& origin = "<config>");

RunConfig load_config(const std::string& path);

}  // namespace egdm
