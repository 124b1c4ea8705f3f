/**
 * @file test_gauss_fermi.cpp
 * @brief Gauss-Fermi statistics against brute-force quadrature and closed-form limits.
 */

#include <doctest.h>

#include <algorithm>
#include <random>

#include "egdm/errors.hpp"
#include "egdm/gauss_fermi.hpp"
#include "oracles.hpp"

using namespace egdm;
using test::rel;

TEST_CASE("density matches brute-force trapezoid quadrature") {
  double worst = 0.0;
  for (double sh : {2.0, 3.0, 4.5, 6.0, 8.0}) {
    const double T = 300.0;
    const PhysicalParameters p{1e-10, sh * constants::kB * T, 1e26};
    for (double ef_sigmas : {-6.0, -3.0, -1.0, 0.0, 0.5, 2.0}) {
      const double E_F = ef_sigmas * p.sigma;
      worst = std::max(worst, rel(gauss_fermi_density(E_F, p, T), test::brute_density(E_F, p, T)));
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("derivative matches brute-force quadrature of the symmetric kernel") {
  const auto p = test::pasveer();
  for (double T : {235.0, 305.0})
    for (double E_F : {0.0, -0.3, 0.1})
      CHECK(rel(gauss_fermi_density_derivative(E_F, p, T), test::brute_density_derivative(E_F, p, T)) < 1e-8);
}

TEST_CASE("derivative is consistent with central differences") {
  const auto p = test::pasveer();
  const double T = 270.0;
  const double h = 1e-6 * constants::kB * T;
  for (double E_F : {-0.8, -0.4, -0.1, 0.0, 0.2}) {
    const double fd = (gauss_fermi_density(E_F + h, p, T) - gauss_fermi_density(E_F - h, p, T)) / (2.0 * h);
    CHECK(rel(gauss_fermi_density_derivative(E_F, p, T), fd) < 1e-8);
  }
}

TEST_CASE("Boltzmann limit far below the density-of-states centre") {
  for (const auto& p : {test::pasveer(), test::coehoorn()}) {
    for (double T : {200.0, 270.0, 350.0}) {
      const double E_F = -20.0 * p.sigma;
      const double n = gauss_fermi_density(E_F, p, T);
      CHECK(rel(n, test::boltzmann_density(E_F, p, T)) < 1e-3);
      // dn/dE_F -> n/kT, i.e. g3 -> 1
      CHECK(rel(gauss_fermi_density_derivative(E_F, p, T), n / (constants::kB * T)) < 1e-3);
    }
  }
  const auto p = test::pasveer();
  for (double s : {-15.0, -17.5, -25.0}) {
    const double E_F = s * p.sigma;
    CHECK(rel(gauss_fermi_density(E_F, p, 300.0), test::boltzmann_density(E_F, p, 300.0)) < 1e-3);
  }
}

TEST_CASE("degenerate and narrow-DOS limits") {
  const auto p = test::pasveer();
  CHECK(gauss_fermi_density(2.0, p, 300.0) / p.Nt == doctest::Approx(1.0).epsilon(1e-12));
  // narrow DOS (sigma_hat just above 1) at E_F = 0 sits near Nt/2 by symmetry
  const PhysicalParameters narrow{1e-10, 1.05 * constants::kB * 300.0, 1e26};
  CHECK(gauss_fermi_density(0.0, narrow, 300.0) / narrow.Nt == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(gauss_fermi_density(0.0, p, 300.0) / p.Nt == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("density is strictly increasing and the derivative positive") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ef(-1.2, 0.4), sig(0.05, 0.16), temp(200.0, 350.0);
  for (int k = 0; k < 1000; ++k) {
    const PhysicalParameters p{1e-10, sig(rng), 1e26};
    const double T = temp(rng);
    if (p.sigma / (constants::kB * T) <= 1.5) continue;
    double a = ef(rng), b = ef(rng);
    if (a > b) std::swap(a, b);
    if (b - a < 1e-9) continue;
    REQUIRE(gauss_fermi_density(a, p, T) < gauss_fermi_density(b, p, T));
    if (k < 100) REQUIRE(gauss_fermi_density_derivative(a, p, T) > 0.0);
  }
}

TEST_CASE("inversion round trip and monotonicity") {
  const auto p = test::pasveer();
  for (double T : {235.0, 270.0, 305.0}) {
    for (double E_F : {-1.0, -0.5, 0.0}) {
      const double n = gauss_fermi_density(E_F, p, T);
      const double back = invert_gauss_fermi(n, p, T);
      CHECK(std::fabs(back - E_F) < 1e-10);
      CHECK(rel(gauss_fermi_density(back, p, T), n) < 1e-12);
    }
    double n = 0.3 * p.Nt;
    double prev = invert_gauss_fermi(n, p, T);
    for (int k = 0; k < 12; ++k) {
      n /= 10.0;
      const double e = invert_gauss_fermi(n, p, T);
      CHECK(e < prev);
      prev = e;
    }
  }
  CHECK(std::fabs(invert_gauss_fermi(0.5 * p.Nt, p, 300.0)) < 1e-12);
}

TEST_CASE("reduced table inversion with derivative") {
  const GaussFermiTable gf(0.14, 270.0);
  for (double n : {1e-12, 1e-6, 1e-3, 0.1, 0.5, 0.9}) {
    const auto inv = gf.invert_with_derivative(n, 0.0);
    CHECK(rel(inv.n, n) < 1e-12);
    CHECK(rel(inv.dn, gf.evaluate(inv.eta).dn) < 1e-10);
  }
}

TEST_CASE("inversion rejects densities outside (0, Nt)") {
  const auto p = test::pasveer();
  CHECK_THROWS_AS(invert_gauss_fermi(0.0, p, 300.0), DomainError);
  CHECK_THROWS_AS(invert_gauss_fermi(-1.0, p, 300.0), DomainError);
  CHECK_THROWS_AS(invert_gauss_fermi(p.Nt, p, 300.0), DomainError);
  CHECK_THROWS_AS(invert_gauss_fermi(2.0 * p.Nt, p, 300.0), DomainError);
}

TEST_CASE("dual numbers carry the exact eta derivative through the quadrature") {
  const double sh = 0.14 / (constants::kB * 270.0);
  for (double eta : {-30.0, -5.0, 0.0, 3.0}) {
    const Dual1 e{eta, 1.0};
    const auto v = gauss_fermi_reduced<Dual1>(e, Dual1(sh));
    CHECK(rel(v.n.d, v.dn.v) < 1e-12);
  }
}
