#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polykin/hierarchy.hpp"
#include "polykin/runner.hpp"

using namespace polykin;

namespace {

SpectralField2D rand_field(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SpectralField2D f(n, n);
  for (double& x : f.mutable_values()) x = unif(rng);
  return f;
}

SpectralField2D constant(int n, double v) {
  SpectralField2D f(n, n);
  f.mutable_values().assign(std::size_t(n) * n, v);
  return f;
}

}  // namespace

TEST_CASE("zeroth moment sees pure transport") {
  std::mt19937_64 rng(3);
  const int n = 16;
  VectorField2D u = leray_project(VectorField2D(rand_field(rng, n), rand_field(rng, n)));
  MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
  for (auto& f : M.fields()) f = rand_field(rng, n);
  auto rhs = hierarchy_rhs(M, u, 0.8, 0.0);
  // With eps contributions absent at degree zero and nu2 = 0 the remaining
  // right side is exactly -u . grad M00 (dealiased divergence form here).
  SpectralField2D expect =
      -1.0 * (derivative(multiply_dealias(u.u1, M.field(0, 0)), 0) +
              derivative(multiply_dealias(u.u2, M.field(0, 0)), 1));
  dealias_inplace(expect);
  CHECK((rhs[0] - expect).max_abs() <= 1e-13);
}

TEST_CASE("uniform second moment ODE closed form") {
  // q = 1, u = 0, spatially uniform: dM20/dt = 2 eps M00 - 4 eps M20, so
  // from M20(0) = 1, M00 = 1: M20(t) = 1/2 + (1/2) e^{-4 eps t}.
  const int n = 8;
  const double eps = 0.9;
  MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
  M.field(0, 0) = constant(n, 1.0);
  M.field(2, 0) = constant(n, 1.0);
  M.field(0, 2) = constant(n, 0.5);
  VectorField2D u(n, n);

  auto rhs = hierarchy_rhs(M, u, eps, 0.0);
  CHECK(rhs[3].values()[0] == doctest::Approx(2.0 * eps - 4.0 * eps).epsilon(1e-12));

  HierarchyStepper st(eps, 0.0);
  double dt = 1e-3, T = 0.5;
  int steps = int(T / dt + 0.5);
  for (int i = 0; i < steps; ++i) st.step_inplace(M, u, dt);
  double expect = 0.5 + 0.5 * std::exp(-4.0 * eps * T);
  CHECK(M.field(2, 0).values()[0] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("degree-2 hierarchy is the closed system on random states") {
  std::mt19937_64 rng(17);
  const int n = 16;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    VectorField2D u =
        leray_project(VectorField2D(rand_field(rng, n), rand_field(rng, n)));
    MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
    for (auto& f : M.fields()) f = rand_field(rng, n);
    OldroydState S(n, n);
    S.rho = M.field(0, 0);
    S.sigma.s11 = 2.0 * M.field(2, 0);
    S.sigma.s12 = 2.0 * M.field(1, 1);
    S.sigma.s22 = 2.0 * M.field(0, 2);
    double eps = 0.3 + 0.1 * trial / 100.0, nu2 = 0.2;
    auto hr = hierarchy_rhs(M, u, eps, nu2);
    OldroydRhs orr = oldroyd_rhs(S, u, eps, nu2);
    worst = std::max(worst, (2.0 * hr[3] - orr.s11).max_abs());
    worst = std::max(worst, (2.0 * hr[4] - orr.s12).max_abs());
    worst = std::max(worst, (2.0 * hr[5] - orr.s22).max_abs());
    worst = std::max(worst, (hr[0] - orr.rho).max_abs());
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("stress assembly from moment fields") {
  const int n = 8;
  SUBCASE("isotropic second moments give the identity") {
    MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
    M.field(2, 0) = constant(n, 0.5);
    M.field(0, 2) = constant(n, 0.5);
    StressField s = stress_from_moments(M, 1.0);
    CHECK(s.s11.values()[0] == doctest::Approx(1.0));
    CHECK(s.s12.values()[0] == doctest::Approx(0.0));
    CHECK(s.s22.values()[0] == doctest::Approx(1.0));
  }
  SUBCASE("quartic potential couples fourth moments") {
    ClosureSpec cl;
    cl.kind = ClosureSpec::Kind::ZeroTruncation;
    MomentFieldSet M(n, n, 4, 2.0, cl);
    M.field(4, 0) = constant(n, 0.7);
    M.field(2, 2) = constant(n, 0.3);
    StressField s = stress_from_moments(M, 2.0);
    CHECK(s.s11.values()[0] == doctest::Approx(4.0 * (0.7 + 0.3)));
  }
  SUBCASE("zero moments, zero stress; insufficient degree rejected") {
    MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
    CHECK(stress_from_moments(M, 1.0).frobenius_l2() == 0.0);
    ClosureSpec cl;
    cl.kind = ClosureSpec::Kind::ZeroTruncation;
    MomentFieldSet M2(n, n, 2, 2.0, cl);
    CHECK_THROWS_AS(stress_from_moments(M2, 2.0), CapacityError);
  }
}

TEST_CASE("closed-stress relaxation and steady shear") {
  const int n = 8;
  const double eps = 1.0;
  OldroydStepper st(eps, 1.0);

  SUBCASE("uniform relaxation to rho I") {
    OldroydState S(n, n);
    S.rho = constant(n, 1.0);
    S.sigma.s11 = constant(n, 2.0);
    S.sigma.s12 = constant(n, -0.3);
    S.sigma.s22 = constant(n, 0.7);
    VectorField2D u(n, n);
    double dt = 5e-4, T = 0.4;
    for (int i = 0; i < int(T / dt + 0.5); ++i) st.step_inplace(S, u, dt);
    double decay = std::exp(-4.0 * eps * T);
    CHECK(S.sigma.s11.values()[0] ==
          doctest::Approx(1.0 + 1.0 * decay).epsilon(1e-7));
    CHECK(S.sigma.s12.values()[0] == doctest::Approx(-0.3 * decay).epsilon(1e-7));
    CHECK(S.sigma.s22.values()[0] ==
          doctest::Approx(1.0 - 0.3 * decay).epsilon(1e-7));
  }

  SUBCASE("equilibrium stress is stationary") {
    OldroydState S(n, n);
    S.rho = constant(n, 1.3);
    S.sigma.s11 = constant(n, 1.3);
    S.sigma.s22 = constant(n, 1.3);
    VectorField2D u(n, n);
    for (int i = 0; i < 100; ++i) st.step_inplace(S, u, 1e-3);
    CHECK(S.sigma.s11.values()[0] == doctest::Approx(1.3).epsilon(1e-12));
    CHECK(S.sigma.s12.max_abs() <= 1e-14);
  }

  SUBCASE("steady homogeneous shear fixed point") {
    // u = (gamma x2, 0) is not periodic; verify the algebraic fixed point of
    // the local source terms instead: J sigma + sigma J^T - 4 eps sigma
    // + 4 eps rho I = 0 with J12 = gamma gives sigma12 = gamma / (4 eps),
    // sigma11 = 1 + gamma^2 / (8 eps^2), sigma22 = 1 (rho = 1).
    double gamma = 0.8;
    double s12 = gamma / (4.0 * eps);
    double s11 = 1.0 + gamma * gamma / (8.0 * eps * eps);
    double s22 = 1.0;
    // Residuals of the three component equations:
    double r11 = 2.0 * gamma * s12 - 4.0 * eps * s11 + 4.0 * eps;
    double r12 = gamma * s22 - 4.0 * eps * s12;
    double r22 = -4.0 * eps * s22 + 4.0 * eps;
    CHECK(std::abs(r11) <= 1e-14);
    CHECK(std::abs(r12) <= 1e-14);
    CHECK(std::abs(r22) <= 1e-14);
  }
}

TEST_CASE("uniform velocity offsets only advect") {
  // Galilean consistency: adding a constant to u shifts the solution in x.
  // The residual is the RK2 phase error on the offset advection, of size
  // T (k u)^3 dt^2 / 6; dt is chosen so it sits below 1e-8.
  const int n = 16;
  const double eps = 1.0, nu2 = 0.5;
  OldroydState S0(n, n);
  S0.rho = SpectralField2D::sample(
      n, n, [](double x, double y) { return 1.0 + 0.2 * std::cos(x) * std::sin(y); });
  S0.sigma.s11 = constant(n, 1.0);
  S0.sigma.s12 = SpectralField2D::sample(
      n, n, [](double x, double y) { return 0.1 * std::sin(x) * std::cos(y); });
  S0.sigma.s22 = constant(n, 1.0);

  OldroydStepper st(eps, nu2);
  OldroydState a = S0, b = S0;
  VectorField2D zero(n, n);
  VectorField2D shift(constant(n, 1.0), SpectralField2D(n, n));
  const double cell = 2.0 * std::numbers::pi / n;
  const int steps = 4096;
  const double dt = cell / steps;  // offset run travels one cell in total
  for (int i = 0; i < steps; ++i) {
    st.step_inplace(a, zero, dt);
    st.step_inplace(b, shift, dt);
  }
  double err = std::max((b.sigma.s12 - a.sigma.s12.shifted(1, 0)).max_abs(),
                        (b.rho - a.rho.shifted(1, 0)).max_abs());
  CHECK(err <= 1e-8);
}

TEST_CASE("kinetic and moment routes agree at matched initialization") {
  SimConfig cfg;
  cfg.nx = 8;
  cfg.nm = 48;
  cfg.lm = 6.0;
  cfg.initial_f = InitialF::StretchedGaussian;
  cfg.stretch_c = 1.5;
  KineticDensity f = initial_density(cfg);
  MomentFieldSet M = MomentFieldSet::from_kinetic(f, 2, 1.0, ClosureSpec{});
  ClosureReport rep = closure_consistency_check(f, M);
  CHECK(rep.l2_rel <= 1e-12);  // same quadrature on both routes

  OldroydState S = OldroydState::from_kinetic(f);
  ClosureReport rep2 = closure_consistency_check(f, S, 1.0);
  CHECK(rep2.l2_rel <= 1e-12);
}

TEST_CASE("closure guards") {
  CHECK_THROWS(MomentFieldSet(8, 8, 2, 2.0, ClosureSpec{}));  // exact needs q=1
  std::mt19937_64 rng(7);
  ClosureSpec cl;
  cl.kind = ClosureSpec::Kind::ZeroTruncation;
  MomentFieldSet M(8, 8, 2, 2.0, cl);
  for (auto& f : M.fields()) f = rand_field(rng, 8);
  VectorField2D u(8, 8);
  // q = 2 with degree-2 table: the restoring term reaches degree 4 and is
  // closed to zero; the assembly must not throw.
  CHECK_NOTHROW(hierarchy_rhs(M, u, 1.0, 0.0));

  ClosureSpec eqf;
  eqf.kind = ClosureSpec::Kind::EquilibriumFactorization;
  MomentFieldSet M2(8, 8, 2, 2.0, eqf);
  for (auto& f : M2.fields()) f = rand_field(rng, 8);
  CHECK_NOTHROW(hierarchy_rhs(M2, u, 1.0, 0.0));

  CHECK_THROWS(hierarchy_rhs(
      [] {
        ClosureSpec z;
        z.kind = ClosureSpec::Kind::ZeroTruncation;
        MomentFieldSet m(8, 8, 2, 1.5, z);
        return m;
      }(),
      u, 1.0, 0.0));  // non-integer q unsupported by the moment route
}

TEST_CASE("equilibrium factorization closure is exact at equilibrium") {
  // A q = 2 equilibrium state: the closed-out degree-4 moments are exactly
  // M00 times the equilibrium moments, so the closure reproduces them.
  SimConfig cfg;
  cfg.nx = 4;
  cfg.nm = 64;
  cfg.lm = 4.0;
  cfg.q = 2.0;
  cfg.initial_f = InitialF::Equilibrium;
  cfg.solver = SolverKind::Kinetic;
  KineticDensity f = initial_density(cfg);
  ClosureSpec eqf;
  eqf.kind = ClosureSpec::Kind::EquilibriumFactorization;
  MomentFieldSet M2 = MomentFieldSet::from_kinetic(f, 2, 2.0, eqf);
  MomentFieldSet M4 = MomentFieldSet::from_kinetic(f, 4, 2.0, eqf);
  double m40_closed = M2.closed_value(4, 0, 0);
  double m40_true = M4.field(4, 0).values()[0];
  CHECK(m40_closed == doctest::Approx(m40_true).epsilon(1e-6));
}
