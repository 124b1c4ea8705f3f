/**
 * @file commands.cpp
 * @brief The four egdm-oed subcommands and their output files.
 */

#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <unistd.h>
#include <utility>
#include <vector>

#include "egdm/errors.hpp"
#include "egdm/oed.hpp"
#include "egdm/verification.hpp"

namespace egdm::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kParameterNames[3] = {"mu0", "sigma", "Nt"};

std::string num(double v) { return fmt::format("{}", v); }
/// Lengths in nm and temperatures; 12 digits hide the nm <-> m round trip.
std::string design_num(double v) { return fmt::format("{:.12g}", v); }

/// Compact label for file names: 275 -> "275", 339.1 -> "339.1".
std::string label(double v) { return fmt::format("{:g}", std::round(v * 1e6) / 1e6); }

std::string jv_csv(const std::vector<SolveResult>& sweep) {
  std::string s = "voltage_V,current_density_A_per_m2,iterations,residual\n";
  for (const auto& r : sweep) s += fmt::format("{},{},{},{}\n", num(r.op.V), num(r.J), r.iterations, num(r.residual));
  return s;
}

using FileSet = std::vector<std::pair<std::string, std::string>>;

/// Every J-V file of a design; nothing is written until all sweeps succeed.
FileSet jv_files(const RunConfig& cfg, const DesignVector& d, const std::string& prefix) {
  FileSet files;
  for (int e = 0; e < kNumExperiments; ++e) {
    const auto q = d.experiment(e, cfg.voltages);
    files.emplace_back(jv_file_name(q.L, q.T, prefix), jv_csv(voltage_sweep(cfg.parameters, cfg.constants, q, cfg.oed.solver)));
  }
  return files;
}

void write_all(const std::string& dir, const FileSet& files) {
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_atomically((fs::path(dir) / name).string(), content);
}

std::string design_lines(const DesignVector& d) {
  return fmt::format("L_nm = {}, {}, {}\nT_K = {}, {}, {}\n", design_num(d.L[0] * 1e9), design_num(d.L[1] * 1e9),
                     design_num(d.L[2] * 1e9), design_num(d.T[0]), design_num(d.T[1]), design_num(d.T[2]));
}

std::string covariance_text(const CovarianceReport& r, const RunConfig& cfg) {
  std::string s = "# parameter covariance in relative coordinates (mu0, sigma, Nt)\n";
  s += design_lines(cfg.design);
  s += fmt::format("alpha = {}\n", num(cfg.oed.alpha));
  for (int i = 0; i < 3; ++i)
    s += fmt::format("covp_row{} = {}, {}, {}\n", i + 1, num(r.covp(i, 0)), num(r.covp(i, 1)), num(r.covp(i, 2)));
  s += fmt::format("objective_trace_over_Np = {}\n", num(r.objective));
  s += fmt::format("gamma_dof3 = {}\ngamma_dof1 = {}\n", num(r.gamma), num(r.gamma_dof1));
  for (int i = 0; i < 3; ++i)
    s += fmt::format("theta_{}_percent = {}\n", kParameterNames[i], num(r.theta[i]));
  for (int i = 0; i < 3; ++i)
    s += fmt::format("theta_{}_percent_dof1 = {}\n", kParameterNames[i], num(r.theta_dof1[i]));
  int clamped = 0;
  for (int v : r.clamp_signature) clamped += v;
  s += fmt::format("max_coupled_residual = {}\nmax_flux_spread = {}\nclamp_kinks = {}\nclamped_evaluations = {}\n",
                   num(r.max_coupled_residual), num(r.max_flux_spread), r.kink_hits, clamped);
  return s;
}

int run_guarded(int (*body)(const CommandContext&), const CommandContext& ctx) {
  try {
    return body(ctx);
  } catch (const ValidationError& e) {
    fmt::print(stderr, "validation error: {}\n", e.what());
    return kValidation;
  } catch (const Error& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return kSolver;
  }
}

int simulate(const CommandContext& ctx) {
  const auto files = jv_files(ctx.config, ctx.config.design, "jv");
  write_all(ctx.out_dir, files);
  fmt::print("wrote {} J-V files to {}\n", files.size(), ctx.out_dir);
  return kSuccess;
}

int covariance(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto r = assemble_covariance(cfg.parameters, cfg.constants, cfg.design, cfg.voltages, cfg.oed);
  const auto desc = confidence_descriptors(r.covp, r.gamma);
  FileSet files{{"covariance.txt", covariance_text(r, cfg)}};
  for (std::size_t k = 0; k < desc.projections.size(); ++k) {
    const auto [i, j] = ConfidenceDescriptors::pairs[k];
    std::string csv = fmt::format("{}_rel,{}_rel\n", kParameterNames[i], kParameterNames[j]);
    for (const auto& pt : desc.projections[k]) csv += fmt::format("{},{}\n", num(pt[0]), num(pt[1]));
    files.emplace_back(fmt::format("ellipsoid_{}_{}.csv", kParameterNames[i], kParameterNames[j]), csv);
  }
  write_all(ctx.out_dir, files);
  fmt::print("theta [%] = ({:.2f}, {:.2f}, {:.2f}), objective = {:.6g}\n", r.theta[0], r.theta[1], r.theta[2],
             r.objective);
  return kSuccess;
}

int design(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  const auto before = assemble_covariance(cfg.parameters, cfg.constants, cfg.design, cfg.voltages, cfg.oed);
  const auto res = optimize_design(cfg.parameters, cfg.constants, cfg.design, cfg.voltages, cfg.oed, cfg.bounds,
                                   cfg.optimizer, [](const HistoryEntry& h) {
                                     fmt::print(stderr, "iteration {:3d}  objective {:.6e}\n", h.iteration,
                                                h.objective);
                                   });
  const auto after = assemble_covariance(cfg.parameters, cfg.constants, res.design, cfg.voltages, cfg.oed);

  std::string hist = "iteration,objective,L1_nm,L2_nm,L3_nm,T1_K,T2_K,T3_K\n";
  for (const auto& h : res.history)
    hist += fmt::format("{},{},{},{},{},{},{},{}\n", h.iteration, num(h.objective), design_num(h.design.L[0] * 1e9),
                        design_num(h.design.L[1] * 1e9), design_num(h.design.L[2] * 1e9), design_num(h.design.T[0]),
                        design_num(h.design.T[1]), design_num(h.design.T[2]));

  std::string rep = res.converged ? "status = converged\n" : "status = NOT CONVERGED\n";
  rep += fmt::format("termination = {}\niterations = {}\nobjective_evaluations = {}\n", res.termination,
                     res.history.empty() ? 0 : res.history.back().iteration, res.evaluations);
  rep += "[start]\n" + design_lines(cfg.design);
  rep += "[optimal]\n" + design_lines(res.design);
  rep += fmt::format("objective_start = {}\nobjective_final = {}\nratio = {}\n", num(res.initial_objective),
                     num(res.objective), num(res.objective / res.initial_objective));
  for (int i = 0; i < 3; ++i)
    rep += fmt::format("theta_{}_percent = {} -> {}\n", kParameterNames[i], num(before.theta[i]),
                       num(after.theta[i]));

  FileSet files{{"design_opt.txt", rep}, {"history.csv", hist}};
  for (auto& f : jv_files(cfg, cfg.design, "jv_before")) files.push_back(std::move(f));
  for (auto& f : jv_files(cfg, res.design, "jv_after")) files.push_back(std::move(f));
  write_all(ctx.out_dir, files);
  fmt::print("ratio = {:.4f} ({})\n", res.objective / res.initial_objective, res.termination);
  return res.converged ? kSuccess : kOptimizer;
}

int verify(const CommandContext& ctx) {
  const auto& cfg = ctx.config;
  VerificationOptions opt;
  opt.solver.N = cfg.oed.solver.N;
  opt.solver.upwind = cfg.oed.solver.upwind;
  opt.solver.acceleration = cfg.oed.solver.acceleration;
  if (ctx.inject_derivative_fault) opt.sensitivity.corrupt_state_derivatives = 1e-3;
  const auto checks = run_verification(cfg.parameters, cfg.constants, cfg.design, cfg.voltages, opt);
  bool ok = true;
  std::string table = "status,measured,threshold,check\n";
  for (const auto& c : checks) {
    ok = ok && c.passed;
    table += fmt::format("{},{},{},\"{}\"\n", c.passed ? "PASS" : "FAIL", num(c.measured), num(c.threshold), c.name);
    fmt::print("{}  {:.3e} (threshold {:.1e})  {}\n", c.passed ? "PASS" : "FAIL", c.measured, c.threshold, c.name);
  }
  write_all(ctx.out_dir, {{"verify_report.csv", table}});
  return ok ? kSuccess : kVerification;
}

}  // namespace

void write_atomically(const std::string& path, const std::string& content) {
  const std::string tmp = fmt::format("{}.tmp{}", path, static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot open '{}' for writing", tmp));
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error(fmt::format("failed writing '{}'", tmp));
    }
  }
  fs::rename(tmp, path);
}

std::string jv_file_name(double L, double T, const std::string& prefix) {
  return fmt::format("{}_L{}_T{}.csv", prefix, label(L * 1e9), label(T));
}

int cmd_simulate(const CommandContext& ctx) { return run_guarded(simulate, ctx); }
int cmd_covariance(const CommandContext& ctx) { return run_guarded(covariance, ctx); }
int cmd_design(const CommandContext& ctx) { return run_guarded(design, ctx); }
int cmd_verify(const CommandContext& ctx) { return run_guarded(verify, ctx); }

}  // namespace egdm::cli
