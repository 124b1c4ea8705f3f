/**
 * @file test_gummel.cpp
 * @brief Self-consistent device solves: convergence, consistency and
 *        invariants of the converged states.
 */

#include <doctest.h>

#include <chrono>
#include <cmath>

#include "egdm/errors.hpp"
#include "egdm/gummel.hpp"
#include "oracles.hpp"

using namespace egdm;
using test::rel;

namespace {

GummelSettings tight(int N = 200) {
  GummelSettings s;
  s.N = N;
  s.TOL = 1e-10;
  s.max_iter = 2000;
  return s;
}

}  // namespace

TEST_CASE("zero bias carries no current") {
  const auto p = test::pasveer();
  const auto r = gummel_solve(p, FixedConstants{}, {275e-9, 305.0, 0.0}, tight());
  CHECK(r.converged);
  const auto at_one = gummel_solve(p, FixedConstants{}, {275e-9, 305.0, 1.0}, tight());
  CHECK(std::fabs(r.J) < 1e-6 * std::fabs(at_one.J));
}

TEST_CASE("converged state satisfies the discrete equations") {
  const auto p = test::pasveer();
  const FixedConstants c;
  const OperatingPoint op{275e-9, 305.0, 10.0};
  const auto s = tight();
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = gummel_solve(p, c, op, s);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.converged);
  CHECK(r.update_norm < s.TOL);
  CHECK(seconds < 1.0);

  CHECK(test::independent_residual_norm(p, c, op, r.state) < 10.0 * s.TOL);
  CHECK(coupled_residual_norm(p, c, op, s, r.state) < 10.0 * s.TOL);
  // conservation holds for the fluxes of the final continuity solve; the spread
  // recomputed from the double-precision state is limited by cancellation
  CHECK(r.frozen_flux_spread < 1e-10);
  MESSAGE("flux spread recomputed from the state: " << r.flux_spread);
  for (std::size_t i = 0; i < r.state.n.size(); ++i) {
    CHECK(r.state.n[i] > 0.0);
    CHECK(r.state.n[i] < p.Nt);
  }

  // the converged state is a fixed point of one further cycle
  const auto next = gummel_cycle(p, c, op, s, r.state);
  CHECK(reduced_distance(next, r.state, p.Nt, c.kB * op.T) < 10.0 * s.TOL);
}

TEST_CASE("mesh refinement changes the current by less than one percent") {
  const auto p = test::pasveer();
  const OperatingPoint op{275e-9, 305.0, 10.0};
  const double J128 = gummel_solve(p, FixedConstants{}, op, tight(128)).J;
  const double J256 = gummel_solve(p, FixedConstants{}, op, tight(256)).J;
  CHECK(rel(J128, J256) < 0.01);
}

TEST_CASE("warm and cold starts agree; current rises with voltage") {
  for (const auto& p : {test::pasveer(), test::coehoorn()}) {
    const FixedConstants c;
    const ExperimentControls q{200e-9, 270.0, test::standard_voltages()};
    const auto s = tight();
    const auto sweep = voltage_sweep(p, c, q, s);
    REQUIRE(sweep.size() == q.voltages.size());
    for (std::size_t k = 1; k < sweep.size(); ++k) CHECK(sweep[k].J > sweep[k - 1].J);
    for (std::size_t k : {std::size_t{0}, std::size_t{9}, sweep.size() - 1}) {
      const auto cold = gummel_solve(p, c, {q.L, q.T, q.voltages[k]}, s);
      CHECK(rel(cold.J, sweep[k].J) < 1e-8);
    }
  }
}

TEST_CASE("the reduced problem does not depend on mu0") {
  auto p = test::coehoorn();
  const FixedConstants c;
  const OperatingPoint op{100e-9, 235.0, 6.0};
  const auto a = gummel_solve(p, c, op, tight());
  p.mu0 *= 2.0;
  const auto b = gummel_solve(p, c, op, tight());
  CHECK(reduced_distance(a.state, b.state, p.Nt, c.kB * op.T) < 1e-12);
  CHECK(rel(b.J, 2.0 * a.J) < 1e-12);
}

TEST_CASE("solver input validation and failure reporting") {
  const auto p = test::pasveer();
  GummelSettings s;
  s.N = 2;
  CHECK_THROWS_AS(gummel_solve(p, FixedConstants{}, {275e-9, 305.0, 1.0}, s), ValidationError);
  // sigma / kB T <= 1
  CHECK_THROWS_AS(gummel_solve({1e-5, 0.02, 1e26}, FixedConstants{}, {275e-9, 305.0, 1.0}, GummelSettings{}),
                  ModelValidityError);
  GummelSettings starved;
  starved.max_iter = 2;
  starved.continuation = false;
  CHECK_THROWS_AS(gummel_solve(p, FixedConstants{}, {275e-9, 305.0, 10.0}, starved), ConvergenceError);
}
