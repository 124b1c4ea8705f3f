/**
 * @file config.cpp
 * @brief INI parsing and validation of run configurations.
 */

#include "egdm/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "egdm/errors.hpp"

namespace egdm {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>> kKnownKeys{
    {"parameters", {"mu0", "sigma", "Nt", "eps", "phi1", "phi2"}},
    {"design", {"lengths_nm", "temperatures_K", "voltages"}},
    {"solver", {"N", "TOL", "max_iter", "damping", "acceleration", "upwind"}},
    {"oed",
     {"alpha", "L_min_nm", "L_max_nm", "T_min_K", "T_max_K", "max_iterations", "gradient_tolerance",
      "step_tolerance", "multi_start", "seed", "threads"}},
    {"output", {"directory"}},
};

double parse_number(const std::string& raw, const std::string& where) {
  const auto b = raw.find_first_not_of(" \t");
  const auto e = raw.find_last_not_of(" \t");
  double v = 0.0;
  const char* first = b == std::string::npos ? raw.data() : raw.data() + b;
  const char* last = b == std::string::npos ? raw.data() : raw.data() + e + 1;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (first == last || ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ValidationError(fmt::format("{}: '{}' is not a finite number", where, raw));
  return v;
}

std::vector<double> parse_list(const std::string& raw, const std::string& where) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(raw);
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    const auto e = item.find_last_not_of(" \t");
    out.push_back(parse_number(item.substr(b, e - b + 1), where));
  }
  return out;
}

struct Reader {
  const pt::ptree& tree;
  std::string origin;

  const pt::ptree* section(const std::string& name) const {
    const auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  }
  std::string where(const std::string& sec, const std::string& key) const {
    return fmt::format("{}: [{}] {}", origin, sec, key);
  }
  bool has(const std::string& sec, const std::string& key) const {
    const auto* s = section(sec);
    return s && s->find(key) != s->not_found();
  }
  std::string raw(const std::string& sec, const std::string& key) const {
    return section(sec)->get<std::string>(key);
  }
  void number(const std::string& sec, const std::string& key, double& v) const {
    if (has(sec, key)) v = parse_number(raw(sec, key), where(sec, key));
  }
  void integer(const std::string& sec, const std::string& key, int& v) const {
    if (!has(sec, key)) return;
    const double x = parse_number(raw(sec, key), where(sec, key));
    if (x != std::floor(x) || std::fabs(x) > 1e9)
      throw ValidationError(fmt::format("{}: expected an integer", where(sec, key)));
    v = static_cast<int>(x);
  }
  std::vector<double> triple(const std::string& sec, const std::string& key) const {
    if (!has(sec, key)) throw ValidationError(fmt::format("{}: missing", where(sec, key)));
    auto v = parse_list(raw(sec, key), where(sec, key));
    if (v.size() != 3)
      throw ValidationError(fmt::format("{}: expected three values, got {}", where(sec, key), v.size()));
    return v;
  }
};

}  // namespace

void RunConfig::validate() const {
  try {
    egdm::validate(parameters);
    egdm::validate(constants);
    oed.solver.validate();
    bounds.validate();
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError(e.what());
  }
  if (voltages.empty()) throw ValidationError("the voltage series is empty");
  for (double v : voltages)
    if (!std::isfinite(v)) throw ValidationError("voltages must be finite");
  for (int i = 0; i < 3; ++i) {
    if (!(design.L[i] > 0.0)) throw ValidationError(fmt::format("length {} must be positive", i + 1));
    if (!(design.T[i] > 0.0)) throw ValidationError(fmt::format("temperature {} must be positive", i + 1));
    try {
      sigma_hat_checked(parameters, design.T[i]);
    } catch (const Error& e) {
      throw ValidationError(e.what());
    }
  }
  if (!(oed.alpha > 0.0 && oed.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
  if (oed.threads < 1) throw ValidationError("threads must be at least 1");
  if (optimizer.max_iterations < 1) throw ValidationError("max_iterations must be at least 1");
  if (!(optimizer.gradient_tolerance > 0.0) || !(optimizer.step_tolerance > 0.0))
    throw ValidationError("optimizer tolerances must be positive");
  if (optimizer.multi_start < 0) throw ValidationError("multi_start must be non-negative");
  if (output_directory.empty()) throw ValidationError("output directory must not be empty");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(fmt::format("{}: line {}: {}", origin, e.line(), e.message()));
  }
  for (const auto& [name, sec] : tree) {
    const auto known = kKnownKeys.find(name);
    if (known == kKnownKeys.end() || sec.data().size() > 0)
      throw ValidationError(fmt::format("{}: unknown section or top-level key '{}'", origin, name));
    for (const auto& kv : sec)
      if (!known->second.count(kv.first))
        throw ValidationError(fmt::format("{}: unknown key '{}' in [{}]", origin, kv.first, name));
  }

  const Reader r{tree, origin};
  RunConfig cfg;
  if (!r.section("parameters") || !r.section("design"))
    throw ValidationError(fmt::format("{}: [parameters] and [design] sections are required", origin));
  for (const char* key : {"mu0", "sigma", "Nt"})
    if (!r.has("parameters", key)) throw ValidationError(fmt::format("{}: missing", r.where("parameters", key)));
  r.number("parameters", "mu0", cfg.parameters.mu0);
  r.number("parameters", "sigma", cfg.parameters.sigma);
  r.number("parameters", "Nt", cfg.parameters.Nt);
  r.number("parameters", "eps", cfg.constants.eps);
  r.number("parameters", "phi1", cfg.constants.phi1);
  r.number("parameters", "phi2", cfg.constants.phi2);

  const auto L = r.triple("design", "lengths_nm");
  const auto T = r.triple("design", "temperatures_K");
  for (int i = 0; i < 3; ++i) {
    cfg.design.L[i] = L[i] * 1e-9;
    cfg.design.T[i] = T[i];
  }
  if (!r.has("design", "voltages")) throw ValidationError(fmt::format("{}: missing", r.where("design", "voltages")));
  cfg.voltages = parse_list(r.raw("design", "voltages"), r.where("design", "voltages"));

  auto& s = cfg.oed.solver;
  r.integer("solver", "N", s.N);
  r.number("solver", "TOL", s.TOL);
  r.integer("solver", "max_iter", s.max_iter);
  r.number("solver", "damping", s.damping);
  if (r.has("solver", "acceleration")) {
    const auto a = r.raw("solver", "acceleration");
    if (a == "anderson")
      s.acceleration = Acceleration::Anderson;
    else if (a == "none")
      s.acceleration = Acceleration::None;
    else
      throw ValidationError(fmt::format("{}: expected 'anderson' or 'none'", r.where("solver", "acceleration")));
  }
  if (r.has("solver", "upwind")) {
    const auto u = r.raw("solver", "upwind");
    if (u == "logistic")
      s.upwind = UpwindMode::Logistic;
    else if (u == "strict")
      s.upwind = UpwindMode::Strict;
    else
      throw ValidationError(fmt::format("{}: expected 'logistic' or 'strict'", r.where("solver", "upwind")));
  }

  r.number("oed", "alpha", cfg.oed.alpha);
  r.integer("oed", "threads", cfg.oed.threads);
  double lmin = cfg.bounds.L_min * 1e9, lmax = cfg.bounds.L_max * 1e9;
  r.number("oed", "L_min_nm", lmin);
  r.number("oed", "L_max_nm", lmax);
  cfg.bounds.L_min = lmin * 1e-9;
  cfg.bounds.L_max = lmax * 1e-9;
  r.number("oed", "T_min_K", cfg.bounds.T_min);
  r.number("oed", "T_max_K", cfg.bounds.T_max);
  r.integer("oed", "max_iterations", cfg.optimizer.max_iterations);
  r.number("oed", "gradient_tolerance", cfg.optimizer.gradient_tolerance);
  r.number("oed", "step_tolerance", cfg.optimizer.step_tolerance);
  r.integer("oed", "multi_start", cfg.optimizer.multi_start);
  if (r.has("oed", "seed")) {
    const double seed = parse_number(r.raw("oed", "seed"), r.where("oed", "seed"));
    if (seed < 0.0 || seed != std::floor(seed) || seed > 9.0e15)
      throw ValidationError(fmt::format("{}: expected a non-negative integer", r.where("oed", "seed")));
    cfg.optimizer.seed = static_cast<unsigned long long>(seed);
  }
  if (r.has("output", "directory")) cfg.output_directory = r.raw("output", "directory");

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(fmt::format("cannot read config file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

}  // namespace egdm
