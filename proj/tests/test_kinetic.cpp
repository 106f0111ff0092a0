#include <doctest.h>

#include <cmath>
#include <numbers>

#include "polykin/energetics.hpp"
#include "polykin/kinetic.hpp"
#include "polykin/runner.hpp"

using namespace polykin;

namespace {

constexpr double kPi = std::numbers::pi;

KineticDensity uniform_equilibrium(int nx, const MGrid& g, const PotentialSpec& pot) {
  KineticDensity f = KineticDensity::product(
      nx, nx, g, [](double, double) { return 1.0; },
      [&](double m1, double m2) { return std::exp(-pot.U(std::hypot(m1, m2))); });
  f.normalize(1.0);
  return f;
}

}  // namespace

TEST_CASE("cutoff profile plateaus and monotonicity") {
  CutoffProfile cut{3.0};
  CHECK(cut.psi(0.0) == 1.0);
  CHECK(cut.psi(3.0) == 1.0);
  CHECK(cut.psi(6.0) == 0.0);
  CHECK(cut.psi(7.0) == 0.0);
  double prev = 1.0;
  for (double r = 3.0; r <= 6.0; r += 0.05) {
    double v = cut.psi(r);
    CHECK(v <= prev + 1e-14);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("potential closed forms") {
  PotentialSpec pot{2.0};
  CHECK(pot.U(0.0) == 0.0);
  CHECK(pot.U(1.5) == doctest::Approx(std::pow(1.5, 4.0)));
  CHECK(pot.dU(1.5) == doctest::Approx(4.0 * std::pow(1.5, 3.0)));
}

TEST_CASE("equilibrium discretization") {
  PotentialSpec pot{1.0};
  SUBCASE("partition value at the reference resolution") {
    auto eq = equilibrium_density(pot, MGrid{64, 5.0});
    CHECK(std::abs(eq.discrete_z - kPi) <= 1e-8);
    double mass = 0.0;
    for (double v : eq.f) mass += v;
    CHECK(mass * MGrid{64, 5.0}.cell_measure() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("stress of the normalized equilibrium is the identity") {
    auto eq = equilibrium_density(pot, MGrid{64, 6.0});
    SymMat2 s = kramer_stress_slice({eq.f.data(), eq.grid}, pot.q);
    CHECK(s.s11 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(s.s22 == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(s.s12) <= 1e-12);
  }
  SUBCASE("undersized box is rejected") {
    CHECK_THROWS_AS(equilibrium_density(pot, MGrid{64, 2.0}),
                    NormalizationLossError);
  }
}

TEST_CASE("time-step suggestion") {
  MGrid g{64, 6.4};  // h = 0.2
  PotentialSpec pot{1.0};

  SUBCASE("no dynamics, no constraint") {
    FokkerPlanckStepper st(4, 4, g, pot, CutoffProfile{3.2}, 0.0, 0.0);
    KineticDensity f(4, 4, g);
    VectorField2D u(4, 4);
    auto s = st.suggest_dt(f, u);
    CHECK(std::isinf(s.dt));
  }
  SUBCASE("restoring drift bound enters as h over the support speed") {
    // q = 1, alpha = 4 (box widened so alpha <= lm/2 is irrelevant here),
    // eps = 1: |grad U| <= 2 (2 alpha) = 16 on the cutoff support, so the
    // drift term is h / 16.
    MGrid wide{80, 8.0};  // h = 0.2
    FokkerPlanckStepper st(4, 4, wide, pot, CutoffProfile{4.0}, 1.0, 0.0);
    KineticDensity f(4, 4, wide);
    VectorField2D u(4, 4);
    auto s = st.suggest_dt(f, u);
    CHECK(s.dt_m_advection == doctest::Approx(0.2 / 16.0).epsilon(1e-12));
  }
  SUBCASE("doubling the velocity gradient halves the advection bound") {
    FokkerPlanckStepper st(16, 16, g, pot, CutoffProfile{3.2}, 0.0, 0.0);
    KineticDensity f(16, 16, g);
    auto shear = [](double amp) {
      return VectorField2D(
          SpectralField2D::sample(16, 16,
                                  [amp](double, double y) { return amp * std::sin(y); }),
          SpectralField2D(16, 16));
    };
    VectorField2D u1 = shear(0.5), u2 = shear(1.0);
    auto s1 = st.suggest_dt(f, u1), s2 = st.suggest_dt(f, u2);
    CHECK(s1.dt_m_advection == doctest::Approx(2.0 * s2.dt_m_advection).epsilon(1e-10));
    CHECK(s1.dt == doctest::Approx(2.0 * s2.dt).epsilon(1e-10));
  }
}

TEST_CASE("quiescent equilibrium is a fixed point of the step") {
  PotentialSpec pot{1.0};
  MGrid g{64, 6.0};
  // Cutoff inactive where the density is numerically supported.
  FokkerPlanckStepper st(4, 4, g, pot, CutoffProfile{6.0}, 1.0, 1.0);
  auto eq = st.truncated_equilibrium_slice();
  KineticDensity f(4, 4, g);
  for (std::size_t m = 0; m < g.cells(); ++m) {
    double* s = f.slab(m);
    for (std::size_t c = 0; c < f.xpoints(); ++c) s[c] = eq[m];
  }
  f.normalize(1.0);
  KineticDensity f0 = f;
  VectorField2D u(4, 4);
  double dt = st.suggest_dt(f, u).dt;
  for (int i = 0; i < 5; ++i) st.step_inplace(f, u, dt);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    err = std::max(err, std::abs(f.data()[i] - f0.data()[i]));
  CHECK(err / f0.max_value() <= 1e-10);
}

TEST_CASE("mass is conserved by the split step") {
  PotentialSpec pot{1.0};
  MGrid g{32, 6.0};
  FokkerPlanckStepper st(8, 8, g, pot, CutoffProfile{3.0}, 1.0, 1.0);
  KineticDensity f = KineticDensity::product(
      8, 8, g, [](double x1, double x2) { return 1.0 + 0.3 * std::cos(x1) * std::sin(x2); },
      [&](double m1, double m2) {
        double d1 = m1 - 0.5, d2 = m2;
        return std::exp(-(d1 * d1 + d2 * d2));
      });
  f.normalize(1.0);
  FlowState flow(8, 8);
  flow.set_omega(taylor_green_vorticity(8, 8, 0.5));
  const VectorField2D& u = flow.velocity();
  double dt = st.suggest_dt(f, u).dt;
  double m0 = f.mass();
  for (int i = 0; i < 10; ++i) {
    StepStats s = st.step_inplace(f, u, dt);
    CHECK(std::abs(f.mass() - m0) / m0 <= 1e-10);
    CHECK(s.min_before_clip >= -1e-13);
    CHECK(s.clipped_mass_rel <= 1e-10);
  }
}

TEST_CASE("free energy decreases under quiescent relaxation") {
  PotentialSpec pot{1.0};
  MGrid g{48, 6.0};
  FokkerPlanckStepper st(4, 4, g, pot, CutoffProfile{3.0}, 1.0, 1.0);
  KineticDensity f = KineticDensity::product(
      4, 4, g, [](double, double) { return 1.0; },
      [](double m1, double m2) {
        double d1 = m1 - 0.9, d2 = m2 + 0.5;
        return std::exp(-(d1 * d1 + d2 * d2));
      });
  f.normalize(1.0);
  VectorField2D u(4, 4);
  double dt = st.suggest_dt(f, u).dt;
  double prev = free_energy(f, pot);
  for (int i = 0; i < 100; ++i) {
    st.step_inplace(f, u, dt);
    double e = free_energy(f, pot);
    CHECK(e <= prev + 1e-8);
    prev = e;
  }
}

TEST_CASE("relaxation reaches the equilibrium in L1") {
  PotentialSpec pot{1.0};
  MGrid g{64, 8.0};
  const double eps = 1.0;
  FokkerPlanckStepper st(4, 4, g, pot, CutoffProfile{4.0}, eps, 1.0);
  KineticDensity f = KineticDensity::product(
      4, 4, g, [](double, double) { return 1.0; },
      [](double m1, double m2) { return std::exp(-(m1 * m1 + m2 * m2) / 2.0); });
  f.normalize(1.0);
  auto eq = st.truncated_equilibrium_slice();
  double l1_0 = l1_distance_to_local(f, eq);
  VectorField2D u(4, 4);
  double dt = st.suggest_dt(f, u).dt;
  double t = 0.0, horizon = 5.0 / eps;
  while (t < horizon) {
    double step = std::min(dt, horizon - t);
    st.step_inplace(f, u, step);
    t += step;
  }
  double l1_T = l1_distance_to_local(f, eq);
  CHECK(l1_T <= 0.10 * l1_0);
}

TEST_CASE("scalar transport consistency of the zeroth moment") {
  // The zeroth moment must evolve exactly like an independently stepped
  // advection-diffusion scalar under the same velocity.
  PotentialSpec pot{1.0};
  MGrid g{16, 6.0};
  const double nu2 = 0.7;
  FokkerPlanckStepper st(16, 16, g, pot, CutoffProfile{3.0}, 0.9, nu2);
  KineticDensity f = KineticDensity::product(
      16, 16, g,
      [](double x1, double x2) { return 1.0 + 0.4 * std::sin(x1) * std::cos(2 * x2); },
      [](double m1, double m2) { return std::exp(-(m1 * m1 + m2 * m2)); });
  f.normalize(1.0);
  FlowState flow(16, 16);
  flow.set_omega(taylor_green_vorticity(16, 16, 0.5));
  const VectorField2D& u = flow.velocity();
  SpectralField2D rho0 = number_density(f);

  double dt = st.suggest_dt(f, u).dt;
  st.step_inplace(f, u, dt);
  SpectralField2D rho1 = number_density(f);

  // Independent scalar step: same integrating-factor Heun scheme.
  const int n = 16, nyh = n / 2 + 1;
  std::vector<double> ifac(std::size_t(n) * nyh);
  for (int j0 = 0; j0 < n; ++j0) {
    double k1 = wavenumber(j0, n);
    for (int j1 = 0; j1 < nyh; ++j1)
      ifac[std::size_t(j0) * nyh + j1] = std::exp(-nu2 * (k1 * k1 + double(j1) * j1) * dt);
  }
  auto nonlin = [&](const SpectralField2D& c) {
    return -1.0 * (derivative(multiply_dealias(u.u1, c), 0) +
                   derivative(multiply_dealias(u.u2, c), 1));
  };
  SpectralField2D n1 = nonlin(rho0);
  SpectralField2D star(n, n);
  {
    auto& d = star.mutable_coeffs();
    const auto& b = rho0.coeffs();
    const auto& s = n1.coeffs();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = ifac[i] * (b[i] + dt * s[i]);
  }
  SpectralField2D n2 = nonlin(star);
  SpectralField2D expect(n, n);
  {
    auto& d = expect.mutable_coeffs();
    const auto& b = rho0.coeffs();
    const auto& s1 = n1.coeffs();
    const auto& s2 = n2.coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (b[i] + 0.5 * dt * s1[i]) + 0.5 * dt * s2[i];
  }
  CHECK((rho1 - expect).max_abs() <= 1e-8 * std::max(1.0, rho0.max_abs()));
}

TEST_CASE("oversized steps are rejected") {
  PotentialSpec pot{1.0};
  MGrid g{32, 6.0};
  FokkerPlanckStepper st(8, 8, g, pot, CutoffProfile{3.0}, 1.0, 1.0);
  KineticDensity f = uniform_equilibrium(8, g, pot);
  VectorField2D u(8, 8);
  double dt = st.suggest_dt(f, u).dt;
  CHECK_THROWS_AS(st.step_inplace(f, u, 50.0 * dt), StepRejected);
}

TEST_CASE("cutoff comparison study") {
  PotentialSpec pot{1.0};
  VectorField2D u(4, 4);

  SUBCASE("inactive cutoffs give identical runs") {
    // Narrow data inside a wide box: the density falls below 1e-16 of its
    // peak by radius 3.9, so cutoffs at 5.5 and 6 never see it.
    MGrid g{64, 12.0};
    KineticDensity f0 = KineticDensity::product(
        4, 4, g, [](double, double) { return 1.0; },
        [](double m1, double m2) { return std::exp(-(m1 * m1 + m2 * m2) / 0.4); });
    f0.normalize(1.0);
    CutoffComparisonReport rep =
        apply_cutoff_comparison(f0, u, pot, 1.0, 1.0, {5.5, 6.0}, 0.05);
    REQUIRE(rep.entries.size() == 2);
    CHECK(rep.entries[1].sigma_diff_rel <= 1e-12);
  }
  SUBCASE("stress differences shrink as the cutoff grows") {
    MGrid g{48, 8.0};
    KineticDensity f0 = KineticDensity::product(
        4, 4, g, [](double, double) { return 1.0; },
        [](double m1, double m2) { return std::exp(-(m1 * m1 + m2 * m2) / 1.6); });
    f0.normalize(1.0);
    CutoffComparisonReport rep =
        apply_cutoff_comparison(f0, u, pot, 1.0, 1.0, {1.5, 2.5, 3.5}, 0.3);
    REQUIRE(rep.entries.size() == 3);
    CHECK(rep.entries[2].sigma_diff_rel < rep.entries[1].sigma_diff_rel);
    CHECK(rep.tail_bound_ok);
  }
}
