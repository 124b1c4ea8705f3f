#pragma once

/**
 * @file commands.hpp
 * @brief The four egdm-oed subcommands and their output files.
 */

#include <string>

#include "egdm/config.hpp"

namespace egdm::cli {

/// Process exit codes.
enum ExitCode : int {
  kSuccess = 0,
  kValidation = 2,
  kOptimizer = 3,
  kVerification = 4,
  kSolver = 5,
};

struct CommandContext {
  RunConfig config;
  std::string out_dir;
  bool inject_derivative_fault = false;
};

int cmd_simulate(const CommandContext& ctx);
int cmd_covariance(const CommandContext& ctx);
int cmd_design(const CommandContext& ctx);
int cmd_verify(const CommandContext& ctx);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomically(const std::string& path, const std::string& content);

/// File name of one experiment's J-V curve, e.g. jv_L275_T235.csv.
std::string jv_file_name(double L, double T, const std::string& prefix = "jv");

}  // namespace egdm::cli
