/**
 * @file test_mobility.cpp
 * @brief EGDM mobility factors, contact densities and boundary potentials.
 */

#include <doctest.h>

#include <cmath>

#include "egdm/boundary.hpp"
#include "egdm/errors.hpp"
#include "egdm/gauss_fermi.hpp"
#include "egdm/mobility.hpp"
#include "oracles.hpp"

using namespace egdm;
using test::rel;

TEST_CASE("g0 at the Pasveer point by direct evaluation") {
  const double sh = 0.14 / (8.617333262e-5 * 270.0);
  CHECK(sh == doctest::Approx(6.0171).epsilon(1e-4));
  CHECK(g0_factor(sh) == doctest::Approx(2.478e-7).epsilon(1e-3));
  const auto f = mobility_factors(1e20, 0.0, -0.5, test::pasveer(), 270.0);
  CHECK(f.g0 == doctest::Approx(std::exp(-0.42 * sh * sh)).epsilon(1e-14));
  CHECK(g0_factor(1e-8) == doctest::Approx(1.0));
}

TEST_CASE("factor ranges and simple limits") {
  const double sh = 5.0;
  CHECK(g1_factor(1e-40, sh) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(g1_factor(0.05, sh) > 1.0);
  CHECK(g2_factor(0.0, sh) == 1.0);
  CHECK(g2_factor(1.0, sh) > 1.0);
  const double delta = 2.0 * (std::log(sh * sh - sh) - std::log(std::log(4.0))) / (sh * sh);
  CHECK(delta_exponent(sh) == doctest::Approx(delta).epsilon(1e-14));
  CHECK(g1_factor(0.05, sh) ==
        doctest::Approx(std::exp(0.5 * (sh * sh - sh) * std::pow(0.1, delta))).epsilon(1e-13));
  const double s15 = std::pow(sh, 1.5);
  CHECK(g2_factor(1.5, sh) ==
        doctest::Approx(std::exp(0.44 * (s15 - 2.2) * (std::sqrt(1.0 + 0.8 * 2.25) - 1.0))).epsilon(1e-13));
}

TEST_CASE("clamps: constant beyond the kink and continuous across it") {
  const double sh = 6.0;
  CHECK(g1_factor(0.1, sh) == g1_factor(0.3, sh));
  CHECK(g2_factor(2.0, sh) == g2_factor(7.0, sh));
  const double eps = 1e-15;
  CHECK(std::fabs(g1_factor(0.1 - eps, sh) - g1_factor(0.1 + eps, sh)) / g1_factor(0.1, sh) < 1e-12);
  CHECK(std::fabs(g2_factor(2.0 - eps, sh) - g2_factor(2.0 + eps, sh)) / g2_factor(2.0, sh) < 1e-12);
}

TEST_CASE("clamp derivatives follow the executed branch") {
  const double sh = 6.0;
  KinkMonitor k;
  const auto inside = g1_factor(Dual1{0.09, 1.0}, Dual1(sh), &k);
  const auto beyond = g1_factor(Dual1{0.2, 1.0}, Dual1(sh), &k);
  CHECK(inside.d > 0.0);
  CHECK(beyond.d == 0.0);
  CHECK(k.density_clamp == 0);
  g1_factor(Dual1{0.1, 1.0}, Dual1(sh), &k);
  CHECK(k.density_clamp == 1);
  const auto at_kink = g2_factor(Dual1{2.0, 1.0}, Dual1(sh), &k);
  CHECK(k.field_clamp == 1);
  CHECK(at_kink.d > 0.0);  // unclamped branch at the kink itself

  // constant-branch evaluations are counted separately from exact kink hits
  CHECK(k.density_clamped == 1);
  CHECK(k.field_clamped == 0);
  g2_factor(2.5, sh, &k);
  CHECK(k.field_clamped == 1);
  CHECK(k.clamped() == 2);
}

TEST_CASE("g3 tends to 1 in the nondegenerate limit") {
  const double T = 300.0;
  auto g3_at = [&](const PhysicalParameters& p, double n_red) {
    const double n = n_red * p.Nt;
    return mobility_factors(n, 0.0, invert_gauss_fermi(n, p, T), p, T).g3;
  };
  CHECK(std::fabs(g3_at(test::coehoorn(), 1e-8) - 1.0) < 1e-3);
  // a wide DOS needs a lower density: E_F must sit well below -sigma^2/kT
  CHECK(std::fabs(g3_at(test::pasveer(), 1e-14) - 1.0) < 1e-3);
  CHECK(g3_at(test::pasveer(), 1e-8) > g3_at(test::pasveer(), 1e-11));
  const auto p = test::pasveer();
  const auto deg = mobility_factors(0.3 * p.Nt, 0.0, invert_gauss_fermi(0.3 * p.Nt, p, T), p, T);
  CHECK(deg.g3 > 1.0);
}

TEST_CASE("sigma_hat <= 1 is a model-validity error") {
  PhysicalParameters p = test::pasveer();
  p.sigma = 0.9 * constants::kB * 300.0;
  CHECK_THROWS_AS(mobility_factors(1e20, 0.0, -0.2, p, 300.0), ModelValidityError);
  CHECK_THROWS_AS(sigma_hat_checked(p, 300.0), ModelValidityError);
  CHECK_THROWS_AS(delta_exponent(1.0), ModelValidityError);
}

TEST_CASE("contact densities and image-force lowering") {
  const auto p = test::pasveer();
  FixedConstants c;
  const double T = 300.0;
  const double ohmic = gauss_fermi_density(0.0, p, T);
  for (double g : {0.0, 1e6, 1e8}) {
    const auto [n0, nL] = boundary_densities(g, p, c, T);
    CHECK(n0 == ohmic);
    CHECK(nL == ohmic);
  }
  CHECK(image_force_lowering(1e8, c) == 0.0);

  c.phi1 = 0.3;
  const double field = -1e8;
  const double dphi = std::sqrt(constants::e / (4.0 * constants::pi * 2.66e-11) * 1e8);
  CHECK(image_force_lowering(field, c) == doctest::Approx(dphi).epsilon(1e-14));
  const auto [n0, nL] = boundary_densities(field, p, c, T);
  CHECK(n0 == doctest::Approx(gauss_fermi_density(-0.3 + dphi, p, T)).epsilon(1e-14));
  CHECK(n0 > gauss_fermi_density(-0.3, p, T));
  CHECK(n0 > 0.0);
  CHECK(n0 < p.Nt);
  CHECK(nL == ohmic);
}

TEST_CASE("boundary potentials") {
  FixedConstants c;
  CHECK(boundary_potentials(0.0, c).second == 0.0);
  CHECK(boundary_potentials(1.0, c).second == 1.0);
  c.phi1 = 0.1;
  c.phi2 = 0.3;
  const auto [a, b] = boundary_potentials(2.0, c);
  CHECK(a == 0.0);
  CHECK(b == doctest::Approx(1.8).epsilon(1e-15));
}
