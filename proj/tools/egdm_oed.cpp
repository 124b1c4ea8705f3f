/**
 * @file egdm_oed.cpp
 * @brief egdm-oed: simulate | covariance | design | verify.
 */

#include <CLI11.hpp>
#include <cstdlib>
#include <exception>
#include <fmt/format.h>
#include <string>

#include "commands.hpp"
#include "egdm/errors.hpp"

namespace {

int thread_count(int from_flag, int from_config) {
  if (from_flag > 0) return from_flag;
  if (const char* env = std::getenv("EGDM_OED_THREADS")) {
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && n > 0 && n < 1024) return static_cast<int>(n);
    throw egdm::ValidationError(fmt::format("EGDM_OED_THREADS='{}' is not a positive integer", env));
  }
  return from_config;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace egdm::cli;
  CLI::App app{"Simulation and optimum experimental design for EGDM single-carrier devices"};
  app.require_subcommand(1, 1);

  std::string config_path, out_dir;
  int threads = 0;
  bool fault = false;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "INI configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--threads", threads, "worker threads (fallback: EGDM_OED_THREADS)")
        ->check(CLI::Range(1, 1023));
  };
  auto* simulate = app.add_subcommand("simulate", "J-V sweeps of all nine experiments");
  auto* covariance = app.add_subcommand("covariance", "parameter covariance and confidence regions");
  auto* design = app.add_subcommand("design", "optimise lengths and temperatures");
  auto* verify = app.add_subcommand("verify", "finite-difference and oracle checks");
  for (auto* s : {simulate, covariance, design, verify}) add_common(s);
  verify->add_flag("--inject-derivative-fault", fault)->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kValidation;
  }

  CommandContext ctx;
  try {
    ctx.config = egdm::load_config(config_path);
    ctx.config.oed.threads = thread_count(threads, ctx.config.oed.threads);
  } catch (const egdm::Error& e) {
    fmt::print(stderr, "validation error: {}\n", e.what());
    return kValidation;
  }
  ctx.out_dir = out_dir.empty() ? ctx.config.output_directory : out_dir;
  ctx.inject_derivative_fault = fault;

  try {
    if (*simulate) return cmd_simulate(ctx);
    if (*covariance) return cmd_covariance(ctx);
    if (*design) return cmd_design(ctx);
    return cmd_verify(ctx);
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
}
