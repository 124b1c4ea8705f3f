/**
 * @file gummel.cpp
 * @brief Extended Gummel iteration, voltage continuation and sweeps.
 */

#include "egdm/gummel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <fmt/format.h>
#include <limits>

#include "egdm/errors.hpp"
#include "egdm/gauss_fermi.hpp"
#include "egdm/tridiagonal.hpp"

namespace egdm {

void GummelSettings::validate() const {
  if (N < 4) throw ValidationError(fmt::format("mesh needs N >= 4, got {}", N));
  if (!(TOL > 0.0)) throw ValidationError("TOL must be positive");
  if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) throw ValidationError("damping must lie in (0, 1]");
  if (!(min_damping > 0.0 && min_damping <= damping))
    throw ValidationError("min_damping must lie in (0, damping]");
  if (anderson_depth < 1) throw ValidationError("anderson_depth must be at least 1");
}

std::vector<double> solve_poisson(const std::vector<double>& n, double phi0, double phiN,
                                  double coupling, const std::vector<double>* d,
                                  const std::vector<double>* phi_ref) {
  const std::size_t m = n.size();
  if (m < 1) throw DomainError("solve_poisson: empty density vector");
  if ((d == nullptr) != (phi_ref == nullptr)) throw DomainError("solve_poisson: d and phi_ref go together");
  const double N = static_cast<double>(m + 1);
  const double c = coupling / (N * N);
  std::vector<double> lower(m, -1.0), diag(m, 2.0), upper(m, -1.0), rhs(m);
  for (std::size_t j = 0; j < m; ++j) {
    rhs[j] = c * n[j];
    if (d) {
      diag[j] -= c * (*d)[j];
      rhs[j] -= c * (*d)[j] * (*phi_ref)[j];
    }
  }
  rhs[0] += phi0;
  rhs[m - 1] += phiN;
  return solve_tridiagonal(lower, diag, upper, std::move(rhs));
}

namespace {
// The flux is a small difference of drift and diffusion terms that near an
// injecting contact exceed it by up to ~1e10, so the solve and the flux
// evaluation run in binary128.
using Quad = __float128;

double quad_abs(Quad x) { return static_cast<double>(x < 0 ? -x : x); }
}  // namespace

ContinuityResult solve_continuity(const std::vector<double>& a, const std::vector<double>& b,
                                  double n0, double nN) {
  const std::size_t N = a.size();
  if (b.size() != N || N < 2) throw DomainError("solve_continuity: coefficient sizes");
  const std::size_t m = N - 1;
  std::vector<Quad> c(m), x(m);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t i = j + 1;
    const Quad lower = -static_cast<Quad>(a[i - 1]);
    const Quad diag = static_cast<Quad>(a[i]) + static_cast<Quad>(b[i - 1]);
    const Quad upper = -static_cast<Quad>(b[i]);
    Quad rhs = 0;
    if (j == 0) rhs += static_cast<Quad>(a[0]) * n0;
    if (j == m - 1) rhs += static_cast<Quad>(b[N - 1]) * nN;
    Quad pivot = diag;
    if (j > 0) {
      pivot -= lower * c[j - 1];
      rhs -= lower * x[j - 1];
    }
    if (pivot == 0 || !std::isfinite(static_cast<double>(pivot)))
      throw SingularMatrixError(fmt::format("continuity solve: zero pivot in row {}", j));
    c[j] = upper / pivot;
    x[j] = rhs / pivot;
  }
  for (std::size_t j = m - 1; j-- > 0;) x[j] -= c[j] * x[j + 1];

  ContinuityResult out;
  out.n.resize(m);
  for (std::size_t j = 0; j < m; ++j) out.n[j] = static_cast<double>(x[j]);
  std::vector<Quad> flux(N);
  for (std::size_t k = 0; k < N; ++k) {
    const Quad left = k == 0 ? static_cast<Quad>(n0) : x[k - 1];
    const Quad right = k == N - 1 ? static_cast<Quad>(nN) : x[k];
    flux[k] = static_cast<Quad>(a[k]) * left - static_cast<Quad>(b[k]) * right;
  }
  out.flux.resize(N);
  const Quad ref = flux[N / 2];
  for (std::size_t k = 0; k < N; ++k) {
    out.flux[k] = static_cast<double>(flux[k]);
    out.spread = std::max(out.spread, quad_abs(flux[k] - ref) / quad_abs(ref));
  }
  return out;
}

ContinuityResult solve_continuity(const DiscreteCoefficients<double>& cf,
                                  const std::vector<double>& n_frozen, const std::vector<double>& phi,
                                  const std::vector<double>& dn) {
  const int N = cf.N;
  if (static_cast<int>(n_frozen.size()) != N + 1 || static_cast<int>(phi.size()) != N + 1 ||
      static_cast<int>(dn.size()) != N + 1)
    throw DomainError("solve_continuity: node vectors need N+1 entries");
  std::vector<double> g1(N + 1), g3(N + 1), a(N), b(N);
  for (int i = 0; i <= N; ++i) {
    const auto f = node_factors(n_frozen[i], dn[i], cf.sigma_hat);
    g1[i] = f.g1;
    g3[i] = f.g3;
  }
  for (int k = 0; k < N; ++k) {
    const auto sg = sg_coefficients(phi[k + 1] - phi[k], g1[k], g1[k + 1], g3[k], g3[k + 1],
                                    cf.field_scale, cf.sigma_hat, N, cf.upwind);
    a[k] = sg.a;
    b[k] = sg.b;
  }
  return solve_continuity(a, b, n_frozen[0], n_frozen[N]);
}

namespace {

struct Fields {
  std::vector<double> n, phi, eta;  // interior, reduced
};

struct CycleOutput {
  Fields next;
  double frozen_spread = 0.0;
};

class GummelMap {
 public:
  GummelMap(const DiscreteCoefficients<double>& cf, const GummelSettings& s)
      : cf_(cf), s_(s), gf_(cf.sigma_hat) {}

  const DiscreteCoefficients<double>& coefficients() const { return cf_; }
  const GaussFermiTable& statistics() const { return gf_; }

  CycleOutput apply(const Fields& u) const {
    const int N = cf_.N;
    const int m = N - 1;
    CycleOutput out;
    Fields& g = out.next;
    g.eta.resize(m);
    std::vector<double> dn(m);
    for (int j = 0; j < m; ++j) {
      const auto inv = gf_.invert_with_derivative(u.n[j], u.eta[j]);
      g.eta[j] = inv.eta;
      dn[j] = inv.dn;
    }
    const auto cv = contact_values(cf_, u.phi[0]);

    if (s_.quasi_fermi_predictor)
      g.phi = solve_poisson(u.n, 0.0, cf_.phi_N, -cf_.lambda, &dn, &u.phi);
    else
      g.phi = solve_poisson(u.n, 0.0, cf_.phi_N, -cf_.lambda);

    std::vector<double> nf(N + 1), pf(N + 1), df(N + 1);
    nf[0] = cv.n0;
    nf[N] = cv.nN;
    pf[0] = 0.0;
    pf[N] = cf_.phi_N;
    df[0] = cv.dn0;
    df[N] = cv.dnN;
    for (int j = 0; j < m; ++j) {
      nf[j + 1] = u.n[j];
      pf[j + 1] = g.phi[j];
      df[j + 1] = dn[j];
    }
    auto cont = solve_continuity(cf_, nf, pf, df);
    g.n = std::move(cont.n);
    out.frozen_spread = cont.spread;
    return out;
  }

 private:
  DiscreteCoefficients<double> cf_;
  GummelSettings s_;
  GaussFermiTable gf_;
};

double update_norm(const Fields& a, const Fields& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.n.size(); ++j) {
    const double dn = a.n[j] - b.n[j], dp = a.phi[j] - b.phi[j], de = a.eta[j] - b.eta[j];
    s += dn * dn + dp * dp + de * de;
  }
  return std::sqrt(s);
}

bool all_finite(const Fields& f) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return ok(f.n) && ok(f.phi) && ok(f.eta);
}

bool admissible(const std::vector<double>& n) {
  return std::all_of(n.begin(), n.end(), [](double x) { return x > 0.0 && x < 1.0; });
}

std::vector<double> interleave(const Fields& f) {
  std::vector<double> u(kFieldsPerNode * f.n.size());
  for (std::size_t j = 0; j < f.n.size(); ++j) {
    u[kFieldsPerNode * j] = f.n[j];
    u[kFieldsPerNode * j + 1] = f.phi[j];
    u[kFieldsPerNode * j + 2] = f.eta[j];
  }
  return u;
}

Fields reduce(const DeviceState& s, double Nt, double kT) {
  Fields f;
  f.n.resize(s.n.size());
  f.phi.resize(s.phi.size());
  f.eta.resize(s.E_F.size());
  for (std::size_t j = 0; j < s.n.size(); ++j) {
    f.n[j] = s.n[j] / Nt;
    f.phi[j] = s.phi[j] / kT;
    f.eta[j] = s.E_F[j] / kT;
  }
  return f;
}

DeviceState expand(const Fields& f, const DiscreteCoefficients<double>& cf, double Nt) {
  const double kT = cf.kT;
  DeviceState s;
  s.n.resize(f.n.size());
  s.phi.resize(f.n.size());
  s.E_F.resize(f.n.size());
  for (std::size_t j = 0; j < f.n.size(); ++j) {
    s.n[j] = f.n[j] * Nt;
    s.phi[j] = f.phi[j] * kT;
    s.E_F[j] = f.eta[j] * kT;
  }
  const auto cv = contact_values(cf, f.phi.front());
  s.n0 = cv.n0 * Nt;
  s.nL = cv.nN * Nt;
  s.phi0 = 0.0;
  s.phiL = cf.phi_N * kT;
  s.EF0 = cv.eta0 * kT;
  s.EFL = cv.etaN * kT;
  return s;
}

Fields cold_start(const DiscreteCoefficients<double>& cf) {
  const int N = cf.N;
  const GaussFermiTable gf(cf.sigma_hat);
  Fields f;
  f.phi.resize(N - 1);
  for (int i = 1; i < N; ++i) f.phi[i - 1] = cf.phi_N * static_cast<double>(i) / N;
  const auto cv = contact_values(cf, f.phi.front());
  f.n.resize(N - 1);
  f.eta.resize(N - 1);
  const double l0 = std::log(cv.n0), lN = std::log(cv.nN);
  for (int i = 1; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    f.n[i - 1] = std::exp((1.0 - x) * l0 + x * lN);
    f.eta[i - 1] = gf.invert(f.n[i - 1]);
  }
  return f;
}

/// Warm start from a state at another voltage (same mesh): ramp phi to the new contact value.
Fields warm_start(const DeviceState& init, const DiscreteCoefficients<double>& cf, double Nt) {
  Fields f = reduce(init, Nt, cf.kT);
  const int N = cf.N;
  const double shift = cf.phi_N - init.phiL / cf.kT;
  for (int i = 1; i < N; ++i) f.phi[i - 1] += shift * static_cast<double>(i) / N;
  if (!admissible(f.n)) throw DomainError("warm-start state has densities outside (0, Nt)");
  return f;
}

struct IterationOutcome {
  Fields state;
  int iterations = 0;
  double update_norm = 0.0;
  double residual = 0.0;
  double frozen_spread = 0.0;
};

double residual_norm(const DiscreteCoefficients<double>& cf, const Fields& f) {
  std::vector<double> F;
  discrete_residual<double>(cf, interleave(f), &F, nullptr);
  double s = 0.0;
  for (double v : F) s += v * v;
  return std::sqrt(s);
}

/// Final state from the last map output: E_F made consistent with n.
Fields finalize(const Fields& g, const GaussFermiTable& gf) {
  Fields f = g;
  for (std::size_t j = 0; j < f.n.size(); ++j) f.eta[j] = gf.invert(f.n[j], g.eta[j]);
  return f;
}

IterationOutcome iterate(const GummelMap& map, Fields u, const GummelSettings& s) {
  const auto& cf = map.coefficients();
  const int m = cf.N - 1;
  double omega = s.damping;
  double prev_norm = std::numeric_limits<double>::infinity();
  double prev_mix_norm = std::numeric_limits<double>::infinity();
  double last_norm = std::numeric_limits<double>::infinity();

  // Anderson history in v = (log n, phi)
  std::deque<Eigen::VectorXd> hist_v, hist_f;

  for (int it = 1; it <= s.max_iter; ++it) {
    CycleOutput cyc = map.apply(u);
    if (!all_finite(cyc.next))
      throw ConvergenceError(fmt::format("Gummel iteration produced non-finite values at iteration {}", it),
                             last_norm, it);
    const double norm = update_norm(cyc.next, u);
    last_norm = norm;
    if (!admissible(cyc.next.n)) {
      // the frozen continuity step can overshoot n >= Nt far from the
      // solution; shorten the step until the densities are admissible
      double w = 0.5;
      Fields next = u;
      for (; w >= s.min_damping; w *= 0.5) {
        for (int j = 0; j < m; ++j) next.n[j] = u.n[j] + w * (cyc.next.n[j] - u.n[j]);
        if (admissible(next.n)) break;
      }
      if (!admissible(next.n))
        throw ConvergenceError("Gummel iteration left the admissible density range", norm, it);
      for (int j = 0; j < m; ++j) {
        next.phi[j] = u.phi[j] + w * (cyc.next.phi[j] - u.phi[j]);
        next.eta[j] = u.eta[j] + w * (cyc.next.eta[j] - u.eta[j]);
      }
      u = std::move(next);
      omega = std::min(omega, w);
      hist_v.clear();
      hist_f.clear();
      prev_norm = norm;
      prev_mix_norm = std::numeric_limits<double>::infinity();
      continue;
    }
    if (norm < s.TOL) {
      Fields fin = finalize(cyc.next, map.statistics());
      const double res = residual_norm(cf, fin);
      if (res < 10.0 * s.TOL) return {std::move(fin), it, norm, res, cyc.frozen_spread};
    }

    if (s.acceleration == Acceleration::None) {
      omega = norm > prev_norm ? std::max(0.5 * omega, s.min_damping) : std::min(1.0, 1.3 * omega);
      Fields next = u;
      for (;;) {
        for (int j = 0; j < m; ++j) {
          next.n[j] = u.n[j] + omega * (cyc.next.n[j] - u.n[j]);
          next.phi[j] = u.phi[j] + omega * (cyc.next.phi[j] - u.phi[j]);
          next.eta[j] = u.eta[j] + omega * (cyc.next.eta[j] - u.eta[j]);
        }
        if (admissible(next.n) || omega <= s.min_damping) break;
        omega = std::max(0.5 * omega, s.min_damping);
      }
      if (!admissible(next.n))
        throw ConvergenceError("Gummel iteration lost positivity at minimum damping", norm, it);
      u = std::move(next);
    } else {
      Eigen::VectorXd v(2 * m), f(2 * m);
      for (int j = 0; j < m; ++j) {
        v[j] = std::log(u.n[j]);
        v[m + j] = u.phi[j];
        f[j] = std::log(cyc.next.n[j]) - v[j];
        f[m + j] = cyc.next.phi[j] - u.phi[j];
      }
      const double fn = f.norm();
      // Anderson residuals are not monotone; only a clear blow-up discards the history
      if (fn > 2.0 * prev_mix_norm) {
        hist_v.clear();
        hist_f.clear();
      }
      prev_mix_norm = fn;
      hist_v.push_back(v);
      hist_f.push_back(f);
      while (static_cast<int>(hist_v.size()) > s.anderson_depth + 1) {
        hist_v.pop_front();
        hist_f.pop_front();
      }
      Eigen::VectorXd vn = v + f;
      const int k = static_cast<int>(hist_v.size()) - 1;
      if (k >= 1) {
        Eigen::MatrixXd dF(2 * m, k), dX(2 * m, k);
        for (int c = 0; c < k; ++c) {
          dF.col(c) = hist_f[c + 1] - hist_f[c];
          dX.col(c) = hist_v[c + 1] - hist_v[c];
        }
        const Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
        const Eigen::VectorXd cand = v + f - (dX + dF) * gamma;
        bool ok = cand.allFinite();
        for (int j = 0; ok && j < m; ++j) ok = cand[j] < 0.0;
        if (ok) {
          vn = cand;
        } else {
          hist_v.clear();
          hist_f.clear();
        }
      }
      for (int j = 0; j < m; ++j) {
        u.n[j] = std::exp(vn[j]);
        u.phi[j] = vn[m + j];
      }
      u.eta = cyc.next.eta;
    }
    prev_norm = norm;
  }
  throw ConvergenceError(
      fmt::format("Gummel iteration did not converge in {} iterations (last update norm {:.3e})",
                  s.max_iter, last_norm),
      last_norm, s.max_iter);
}

SolveResult package(const IterationOutcome& out, const DiscreteCoefficients<double>& cf,
                    const PhysicalParameters& p, const OperatingPoint& op) {
  SolveResult r;
  r.op = op;
  r.state = expand(out.state, cf, p.Nt);
  r.u = interleave(out.state);
  r.iterations = out.iterations;
  r.converged = true;
  r.update_norm = out.update_norm;
  r.residual = out.residual;
  r.frozen_flux_spread = out.frozen_spread;
  std::vector<double> flux;
  double J = 0.0;
  discrete_residual<double>(cf, r.u, nullptr, &J, RowScaling::Relative, nullptr, &flux);
  r.J = J;
  for (double f : flux) r.flux_spread = std::max(r.flux_spread, std::fabs(f - J) / std::fabs(J));
  return r;
}

SolveResult solve_from(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                       const GummelSettings& s, const DeviceState* initial, int depth) {
  const auto cf = make_coefficients(p, op.L, op.T, op.V, c, s.N, s.upwind);
  const GummelMap map(cf, s);
  if (initial) {
    try {
      return package(iterate(map, warm_start(*initial, cf, p.Nt), s), cf, p, op);
    } catch (const Error&) {
      if (!s.continuation) throw;
    }
  }
  try {
    return package(iterate(map, cold_start(cf), s), cf, p, op);
  } catch (const Error&) {
    if (!s.continuation || depth >= 6 || std::fabs(op.V) < 1e-3) throw;
  }
  // continuation through the half voltage
  OperatingPoint half = op;
  half.V = 0.5 * op.V;
  const SolveResult mid = solve_from(p, c, half, s, nullptr, depth + 1);
  return package(iterate(map, warm_start(mid.state, cf, p.Nt), s), cf, p, op);
}

}  // namespace

DeviceState initial_guess(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                          int N) {
  validate(p);
  sigma_hat_checked(p, op.T);
  const auto cf = make_coefficients(p, op.L, op.T, op.V, c, N);
  return expand(cold_start(cf), cf, p.Nt);
}

SolveResult gummel_solve(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                         const GummelSettings& s, const DeviceState* initial) {
  validate(p);
  validate(c);
  s.validate();
  if (!(op.L > 0.0) || !(op.T > 0.0) || !std::isfinite(op.V))
    throw ValidationError("operating point needs L > 0, T > 0 and a finite voltage");
  sigma_hat_checked(p, op.T);
  if (initial && initial->intervals() != s.N) initial = nullptr;
  return solve_from(p, c, op, s, initial, 0);
}

DeviceState gummel_cycle(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                         const GummelSettings& s, const DeviceState& state) {
  const auto cf = make_coefficients(p, op.L, op.T, op.V, c, state.intervals(), s.upwind);
  const GummelMap map(cf, s);
  return expand(map.apply(reduce(state, p.Nt, cf.kT)).next, cf, p.Nt);
}

double reduced_distance(const DeviceState& a, const DeviceState& b, double Nt, double kT) {
  return update_norm(reduce(a, Nt, kT), reduce(b, Nt, kT));
}

std::vector<SolveResult> voltage_sweep(const PhysicalParameters& p, const FixedConstants& c,
                                       const ExperimentControls& q, const GummelSettings& s,
                                       const std::vector<DeviceState>* warm) {
  validate(q);
  std::vector<SolveResult> out;
  out.reserve(q.voltages.size());
  for (std::size_t k = 0; k < q.voltages.size(); ++k) {
    const OperatingPoint op{q.L, q.T, q.voltages[k]};
    const DeviceState* init = nullptr;
    if (warm && k < warm->size() && !(*warm)[k].n.empty())
      init = &(*warm)[k];
    else if (!out.empty())
      init = &out.back().state;
    try {
      out.push_back(gummel_solve(p, c, op, s, init));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(fmt::format("V = {} V (L = {} nm, T = {} K): {}", op.V, op.L * 1e9, op.T,
                                         e.what()),
                             e.last_residual(), e.iterations());
    }
  }
  return out;
}

std::vector<double> pack_state(const DeviceState& s, double Nt, double kT) {
  return interleave(reduce(s, Nt, kT));
}

double coupled_residual_norm(const PhysicalParameters& p, const FixedConstants& c, const OperatingPoint& op,
                             const GummelSettings& s, const DeviceState& state) {
  const auto cf = make_coefficients(p, op.L, op.T, op.V, c, state.intervals(), s.upwind);
  return residual_norm(cf, reduce(state, p.Nt, cf.kT));
}

}  // namespace egdm
