/**
 * @file test_discretization.cpp
 * @brief Bernoulli function, Scharfetter-Gummel flux, averaging, the linear
 *        solvers, scaling and dual numbers.
 */

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "egdm/banded_lu.hpp"
#include "egdm/bernoulli.hpp"
#include "egdm/discretization.hpp"
#include "egdm/dual.hpp"
#include "egdm/errors.hpp"
#include "egdm/gummel.hpp"
#include "egdm/scaling.hpp"
#include "egdm/tridiagonal.hpp"
#include "oracles.hpp"

using namespace egdm;
using test::rel;

namespace {

long double bernoulli_ref(long double z) { return z == 0.0L ? 1.0L : z / std::expm1(z); }

}  // namespace

TEST_CASE("Bernoulli function") {
  CHECK(bernoulli(0.0) == 1.0);
  for (double z : {-700.0, -50.0, -3.0, -1e-3, -2e-5, -9e-6, -1e-12, 1e-12, 9e-6, 2e-5, 1e-3, 0.7, 40.0, 700.0}) {
    CHECK(rel(bernoulli(z), static_cast<double>(bernoulli_ref(z))) < 1e-13);
    // B(z) - B(-z) = -z
    CHECK(bernoulli(z) - bernoulli(-z) == doctest::Approx(-z).epsilon(1e-12).scale(1.0));
  }
  CHECK(bernoulli(800.0) >= 0.0);
}

TEST_CASE("SG flux: diffusion, drift and equilibrium limits") {
  const auto p = test::pasveer();
  const double T = 300.0, h = 1e-9, kT = constants::kB * T;
  const double g0 = g0_factor(p.sigma / kT);
  const double g1 = 1.7, g2 = 1.3, g3 = 2.1;
  const double pref = constants::e * p.mu0 * g0 * g1 * g2;
  const double ni = 3e23, nj = 1e23;

  const double diff = sg_flux(ni, nj, 0.4, 0.4, g1, g2, g3, p, T, h);
  CHECK(rel(diff, pref * kT * g3 * (ni - nj) / h) < 1e-14);

  const double dphi = 50.0 * kT;
  const double drift = sg_flux(ni, ni, 0.0, dphi, g1, g2, 1.0, p, T, h);
  CHECK(rel(drift, pref * ni * dphi / h) < 1e-12);

  CHECK(sg_flux(ni, ni, 0.2, 0.2, g1, g2, g3, p, T, h) == 0.0);
  CHECK_THROWS_AS(sg_flux(ni, nj, 0.0, 0.1, g1, g2, 0.0, p, T, h), DomainError);
}

TEST_CASE("upwind averaging of the g-factors") {
  const auto p = test::pasveer();
  const double T = 300.0, h = 1e-9;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> un(-0.6, -0.3), uphi(-0.1, 0.1);
  std::vector<double> EF(12), n(12), phi(12);
  for (int i = 0; i < 12; ++i) {
    EF[i] = un(rng);
    n[i] = gauss_fermi_density(EF[i], p, T);
    phi[i] = uphi(rng);
  }
  const auto a = average_factors(n, phi, EF, p, T, h, UpwindMode::Strict);
  std::vector<double> flipped(phi);
  for (double& v : flipped) v = -v;
  const auto b = average_factors(n, flipped, EF, p, T, h, UpwindMode::Strict);
  for (int k = 0; k < 11; ++k) {
    const auto left = mobility_factors(n[k], 0.0, EF[k], p, T);
    const auto right = mobility_factors(n[k + 1], 0.0, EF[k + 1], p, T);
    const bool left_upwind = phi[k + 1] - phi[k] >= 0.0;
    CHECK(a.g1[k] == (left_upwind ? left.g1 : right.g1));
    CHECK(a.g3[k] == (left_upwind ? left.g3 : right.g3));
    // reversing the field reverses the selection
    CHECK(b.g1[k] == (left_upwind ? right.g1 : left.g1));
    CHECK(a.g2[k] == b.g2[k]);
    CHECK(a.g1[k] > 0.0);
    CHECK(a.g2[k] >= 1.0);
    CHECK(a.g3[k] > 0.0);
  }

  // uniform state: averages equal point values, both modes
  const std::vector<double> nu(5, n[0]), phiu(5, 0.0), EFu(5, EF[0]);
  const auto point = mobility_factors(n[0], 0.0, EF[0], p, T);
  for (auto mode : {UpwindMode::Strict, UpwindMode::Logistic}) {
    const auto u = average_factors(nu, phiu, EFu, p, T, h, mode);
    for (int k = 0; k < 4; ++k) {
      CHECK(u.g1[k] == doctest::Approx(point.g1).epsilon(1e-15));
      CHECK(u.g2[k] == 1.0);
      CHECK(u.g3[k] == doctest::Approx(point.g3).epsilon(1e-15));
    }
  }
  // zero field tie goes to the left node; with equal densities either choice gives the same flux
  const auto tie = average_factors(std::vector<double>{n[0], n[1]}, std::vector<double>{0.0, 0.0},
                                   std::vector<double>{EF[0], EF[1]}, p, T, h, UpwindMode::Strict);
  CHECK(tie.g1[0] == mobility_factors(n[0], 0.0, EF[0], p, T).g1);
  const auto r = mobility_factors(n[1], 0.0, EF[1], p, T);
  CHECK(sg_flux(n[0], n[0], 0.0, 0.0, tie.g1[0], tie.g2[0], tie.g3[0], p, T, h) ==
        sg_flux(n[0], n[0], 0.0, 0.0, r.g1, 1.0, r.g3, p, T, h));
}

TEST_CASE("Poisson: Laplace, parabola and second-order convergence") {
  const int N = 40;
  const auto lin = solve_poisson(std::vector<double>(N - 1, 0.0), 0.3, 1.7, 5.0);
  for (int i = 1; i < N; ++i) CHECK(lin[i - 1] == doctest::Approx(0.3 + 1.4 * i / N).epsilon(1e-13));

  const double lambda = 37.0, c = 0.6;
  const auto par = solve_poisson(std::vector<double>(N - 1, c), 0.0, 0.0, lambda);
  for (int i = 1; i < N; ++i) {
    const double x = static_cast<double>(i) / N;
    CHECK(par[i - 1] == doctest::Approx(0.5 * lambda * c * x * (1.0 - x)).epsilon(1e-12));
  }

  // smooth source: errors at x = 1/2 against the N = 512 solution
  auto solve_mid = [&](int n_int) {
    std::vector<double> src(n_int - 1);
    for (int i = 1; i < n_int; ++i) {
      const double x = static_cast<double>(i) / n_int;
      src[i - 1] = std::exp(x) * (1.0 + std::sin(3.0 * x));
    }
    return solve_poisson(src, 0.2, -0.4, 3.0)[n_int / 2 - 1];
  };
  const double ref = solve_mid(512);
  const double e16 = std::fabs(solve_mid(16) - ref), e32 = std::fabs(solve_mid(32) - ref),
               e64 = std::fabs(solve_mid(64) - ref);
  CHECK(std::log2(e16 / e32) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(e32 / e64) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("continuity: linear and exponential constant-coefficient profiles") {
  const int N = 50;
  const double n0 = 0.3, n1 = 1e-4;
  {
    const auto r = solve_continuity(std::vector<double>(N, 2.0 * N), std::vector<double>(N, 2.0 * N), n0, n1);
    for (int i = 1; i < N; ++i) CHECK(r.n[i - 1] == doctest::Approx(n0 + (n1 - n0) * i / N).epsilon(1e-13));
    CHECK(r.spread < 1e-10);
  }
  for (double E : {-8.0, 3.0, 25.0}) {
    const double z = E / N;
    std::vector<double> a(N, N * bernoulli(-z)), b(N, N * bernoulli(z));
    const auto r = solve_continuity(a, b, n0, n1);
    double worst = 0.0;
    for (int i = 1; i < N; ++i) {
      const double x = static_cast<double>(i) / N;
      const double exact = n0 + (n1 - n0) * std::expm1(E * x) / std::expm1(E);
      worst = std::max(worst, rel(r.n[i - 1], exact));
    }
    CHECK(worst < 1e-8);
    CHECK(r.spread < 1e-10);
    // J = E n - n' of the closed form
    const double J = E * (n0 - (n1 - n0) / std::expm1(E));
    CHECK(rel(r.flux[0], J) < 1e-8);
  }
}

TEST_CASE("Thomas algorithm against a dense solve") {
  const int n = 30;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> lo(n), di(n), up(n), rhs(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    lo[i] = i > 0 ? u(rng) : 0.0;
    up[i] = i + 1 < n ? u(rng) : 0.0;
    di[i] = 3.0 + u(rng);
    rhs[i] = b[i] = u(rng);
    A(i, i) = di[i];
    if (i > 0) A(i, i - 1) = lo[i];
    if (i + 1 < n) A(i, i + 1) = up[i];
  }
  const auto x = solve_tridiagonal(lo, di, up, rhs);
  const Eigen::VectorXd ref = A.partialPivLu().solve(b);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));
  CHECK_THROWS_AS(solve_tridiagonal({0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}, {1.0, 1.0}), SingularMatrixError);
}

TEST_CASE("banded LU with pivoting against Eigen") {
  const int n = 60, kl = 5, ku = 5;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  BandedMatrix B(n, kl, ku);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
      // small diagonal forces row exchanges
      const double v = (i == j ? 0.01 : 1.0) * u(rng);
      B.at(i, j) = v;
      A(i, j) = v;
    }
  std::vector<double> x0(n);
  for (double& v : x0) v = u(rng);
  const auto b = B.multiply(x0);
  const Eigen::VectorXd bd = A * Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  for (int i = 0; i < n; ++i) CHECK(b[i] == doctest::Approx(bd[i]).epsilon(1e-14));

  const BandedLU lu(B);
  const auto x = lu.solve(b);
  const Eigen::VectorXd ref = A.partialPivLu().solve(bd);
  for (int i = 0; i < n; ++i) {
    CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-9));
    CHECK(x[i] == doctest::Approx(x0[i]).epsilon(1e-9));
  }
  // one factorisation, many right-hand sides: bitwise equal to refactorising
  const BandedLU again(B);
  std::vector<double> other(n);
  for (double& v : other) v = u(rng);
  CHECK(lu.solve(other) == again.solve(other));
  CHECK_THROWS_AS(B.at(0, 10), DomainError);

  BandedMatrix S(4, 1, 1);
  S.at(0, 0) = 1.0;
  S.at(1, 0) = 1.0;
  CHECK_THROWS_AS(BandedLU{S}, SingularMatrixError);
}

TEST_CASE("scaling maps are mutual inverses") {
  const auto p = test::pasveer();
  const ExperimentControls q{275e-9, 270.0, {1.0}};
  const auto s = nondimensionalize(p, q, FixedConstants{});
  CHECK(s.reduce_x(q.L) == 1.0);
  CHECK(s.kT == doctest::Approx(constants::kB * 270.0).epsilon(1e-15));
  CHECK(s.lambda ==
        doctest::Approx(constants::e * p.Nt * q.L * q.L / (2.66e-11 * s.kT)).epsilon(1e-14));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DeviceState st;
  for (int i = 0; i < 20; ++i) {
    st.n.push_back(p.Nt * u(rng));
    st.phi.push_back(u(rng));
    st.E_F.push_back(-u(rng));
  }
  st.n0 = p.Nt * 0.3;
  st.nL = p.Nt * 0.01;
  st.phiL = 1.0;
  st.EF0 = -0.1;
  st.EFL = -0.2;
  const auto back = s.to_reduced(s.to_si(s.to_reduced(st)));
  const auto red = s.to_reduced(st);
  for (std::size_t i = 0; i < st.n.size(); ++i) {
    CHECK(rel(back.n[i], red.n[i]) < 1e-14);
    CHECK(rel(back.phi[i], red.phi[i]) < 1e-14);
    CHECK(rel(back.E_F[i], red.E_F[i]) < 1e-14);
  }
  CHECK(rel(s.expand_current(s.reduce_current(12.5)), 12.5) < 1e-15);
  CHECK_THROWS_AS(Mesh(3, 1e-7), ValidationError);
  CHECK_THROWS_AS(Mesh(10, 0.0), ValidationError);
}

TEST_CASE("dual numbers: first and mixed second derivatives") {
  const double x = 0.7, y = -1.3;
  const Dual1 dx{x, 1.0};
  const auto f = exp(dx) * sqrt(dx) + log(dx) / (1.0 + tanh(dx)) - pow(dx, 2.5) + expm1(dx);
  const double t = std::tanh(x);
  const double df = std::exp(x) * std::sqrt(x) + std::exp(x) / (2.0 * std::sqrt(x)) +
                    (1.0 / x) / (1.0 + t) - std::log(x) * (1.0 - t * t) / ((1.0 + t) * (1.0 + t)) -
                    2.5 * std::pow(x, 1.5) + std::exp(x);
  CHECK(f.d == doctest::Approx(df).epsilon(1e-14));

  // d2/dx dy of x^2 y^3 + exp(x y)
  const Dual2 X = make_hyper(x, 1.0, 0.0, 0.0), Y = make_hyper(y, 0.0, 1.0, 0.0);
  const auto g = parts(X * X * Y * Y * Y + exp(X * Y));
  CHECK(g.d_mixed == doctest::Approx(6.0 * x * y * y + std::exp(x * y) * (1.0 + x * y)).epsilon(1e-14));
  CHECK(g.d_outer == doctest::Approx(2.0 * x * y * y * y + y * std::exp(x * y)).epsilon(1e-14));
  CHECK(g.d_inner == doctest::Approx(3.0 * x * x * y * y + x * std::exp(x * y)).epsilon(1e-14));

  // linear residual: directional derivative is exactly A du
  const double A[2][2] = {{2.0, -1.0}, {0.5, 3.0}};
  const double du[2] = {0.3, -0.8};
  const Dual1 u0{1.1, du[0]}, u1{-0.4, du[1]};
  const Dual1 F0 = A[0][0] * u0 + A[0][1] * u1 - 1.0;
  const Dual1 F1 = A[1][0] * u0 + A[1][1] * u1 - 2.0;
  CHECK(F0.d == A[0][0] * du[0] + A[0][1] * du[1]);
  CHECK(F1.d == A[1][0] * du[0] + A[1][1] * du[1]);
}
