#include "polykin/selftest.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "polykin/energetics.hpp"
#include "polykin/hierarchy.hpp"
#include "polykin/kinetic.hpp"
#include "polykin/measure.hpp"
#include "polykin/navier_stokes.hpp"
#include "polykin/runner.hpp"

namespace polykin {

namespace {

constexpr double kPi = std::numbers::pi;

struct Battery {
  SelftestResult result;

  void check(const std::string& name, bool ok, const std::string& detail) {
    result.checks.push_back({name, ok, detail});
  }
  void check_le(const std::string& name, double value, double bound) {
    std::ostringstream ss;
    ss << value << " (tolerance " << bound << ")";
    check(name, value <= bound, ss.str());
  }
};

DiscreteMeasure random_measure(std::mt19937_64& rng, int npts, bool allow_signed) {
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> wgt(0.0, 1.0);
  DiscreteMeasure mu;
  mu.signed_measure = allow_signed;
  for (int i = 0; i < npts; ++i)
    mu.add(pos(rng), pos(rng), allow_signed ? pos(rng) : wgt(rng) + 1e-3);
  return mu;
}

}  // namespace

bool SelftestResult::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

std::string SelftestResult::summary() const {
  std::ostringstream ss;
  for (const auto& c : checks)
    ss << (c.passed ? "[ ok ] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
  ss << (passed() ? "selftest: all checks passed\n" : "selftest: FAILURES present\n");
  return ss.str();
}

SelftestResult selftest(std::uint64_t seed, double kramer_scale) {
  Battery b;
  std::mt19937_64 rng(seed);

  {  // spectral derivatives against the closed form
    auto f = SpectralField2D::sample(32, 32, [](double x, double y) {
      return std::sin(2.0 * x) * std::cos(3.0 * y);
    });
    auto g = gradient(f);
    auto d1 = SpectralField2D::sample(32, 32, [](double x, double y) {
      return 2.0 * std::cos(2.0 * x) * std::cos(3.0 * y);
    });
    auto d2 = SpectralField2D::sample(32, 32, [](double x, double y) {
      return -3.0 * std::sin(2.0 * x) * std::sin(3.0 * y);
    });
    double err = std::max((g.u1 - d1).max_abs(), (g.u2 - d2).max_abs());
    b.check_le("spectral_derivatives", err, 1e-12);
  }

  {  // Leray projection annihilates gradients, fixes solenoidal fields
    auto phi = SpectralField2D::sample(32, 32,
                                       [](double x, double) { return -std::cos(x); });
    VectorField2D v = gradient(phi);
    VectorField2D p = leray_project(v);
    double err = std::max(p.u1.max_abs(), p.u2.max_abs());
    auto sol = VectorField2D(
        SpectralField2D::sample(32, 32, [](double, double y) { return std::sin(y); }),
        SpectralField2D(32, 32));
    VectorField2D q = leray_project(sol);
    err = std::max(err, (q.u1 - sol.u1).max_abs());
    b.check_le("leray_projection", err, 1e-12);
  }

  {  // equilibrium partition value
    PotentialSpec pot{1.0};
    auto eq = equilibrium_density(pot, MGrid{64, 6.0});
    b.check_le("equilibrium_partition", std::abs(eq.discrete_z - kPi), 1e-8);
  }

  {  // Kramer stress of the Hookean equilibrium is the identity
    PotentialSpec pot{1.0};
    MGrid g{64, 6.0};
    KineticDensity f = KineticDensity::product(
        4, 4, g, [](double, double) { return 1.0; },
        [&](double m1, double m2) { return std::exp(-pot.U(std::hypot(m1, m2))); });
    f.normalize(1.0);
    StressField s = kramer_stress(f, pot.q);
    SpectralField2D rho = number_density(f);
    double err = 0.0;
    const auto& rv = rho.values();
    for (std::size_t i = 0; i < rv.size(); ++i) {
      err = std::max(err,
                     std::abs(kramer_scale * s.s11.values()[i] / rv[i] - 1.0));
      err = std::max(err, std::abs(kramer_scale * s.s12.values()[i] / rv[i]));
      err = std::max(err,
                     std::abs(kramer_scale * s.s22.values()[i] / rv[i] - 1.0));
    }
    b.check_le("kramer_stress", err, 1e-8);
  }

  {  // equilibrium is a fixed point of the quiescent kinetic step
    PotentialSpec pot{1.0};
    MGrid g{64, 6.0};
    CutoffProfile cut{6.0};  // inactive on the numerically supported region
    FokkerPlanckStepper st(4, 4, g, pot, cut, 1.0, 1.0);
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
    st.step_inplace(f, u, dt);
    double scale = f0.max_value();
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      err = std::max(err, std::abs(f.data()[i] - f0.data()[i]));
    b.check_le("fp_stationarity", err / scale, 1e-10);
  }

  {  // mass conservation in a forced kinetic run
    SimConfig cfg;
    cfg.nx = 8;
    cfg.nm = 32;
    cfg.lm = 6.0;
    cfg.T = 0.05;
    cfg.sample_interval = 0.05;
    cfg.quiet = true;
    cfg.output_dir = "/tmp/polykin_selftest";
    cfg.solver = SolverKind::Kinetic;
    RunResult r = run(cfg);
    b.check_le("mass_conservation", r.mass_drift_rel, 1e-10);
  }

  {  // single-mode vorticity decays at the viscous rate
    FlowState s(32, 32);
    s.set_omega(SpectralField2D::sample(
        32, 32, [](double x, double y) { return std::cos(x) * std::cos(y); }));
    NavierStokesStepper ns(32, 32, 1.0, 1.0);
    StressField zero(32, 32);
    double dt = 1e-3;
    for (int i = 0; i < 250; ++i) ns.step_inplace(s, zero, dt);
    auto exact = SpectralField2D::sample(32, 32, [&](double x, double y) {
      return std::exp(-2.0 * 0.25) * std::cos(x) * std::cos(y);
    });
    b.check_le("taylor_green_decay", (s.omega() - exact).max_abs(), 1e-8);
  }

  {  // uniform stress relaxes to rho I at the closed-form rate
    OldroydState S(8, 8);
    auto one = SpectralField2D::sample(8, 8, [](double, double) { return 1.0; });
    S.rho = one;
    S.sigma.s11 = 2.0 * one;
    S.sigma.s12 = 0.5 * one;
    S.sigma.s22 = one;
    OldroydStepper st(1.0, 1.0);
    VectorField2D u(8, 8);
    double dt = 1e-3, T = 0.5;
    for (int i = 0; i < int(T / dt + 0.5); ++i) st.step_inplace(S, u, dt);
    double decay = std::exp(-kHookeanRelaxRate * T);
    double err = std::max(
        {std::abs(S.sigma.s11.values()[0] - (1.0 + decay)),
         std::abs(S.sigma.s12.values()[0] - 0.5 * decay),
         std::abs(S.sigma.s22.values()[0] - 1.0)});
    b.check_le("oldroyd_relaxation", err, 1e-6);
  }

  {  // degree-2 hierarchy right side is the closed system, exactly
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto rand_field = [&](int n) {
      SpectralField2D f(n, n);
      auto& v = f.mutable_values();
      for (double& x : v) x = unif(rng);
      return f;
    };
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      int n = 16;
      VectorField2D u = leray_project(VectorField2D(rand_field(n), rand_field(n)));
      MomentFieldSet M(n, n, 2, 1.0, ClosureSpec{});
      for (auto& fld : M.fields()) fld = rand_field(n);
      OldroydState S(n, n);
      S.rho = M.field(0, 0);
      S.sigma.s11 = 2.0 * M.field(2, 0);
      S.sigma.s12 = 2.0 * M.field(1, 1);
      S.sigma.s22 = 2.0 * M.field(0, 2);
      double eps = 0.7, nu2 = 0.3;
      auto hr = hierarchy_rhs(M, u, eps, nu2);
      OldroydRhs orr = oldroyd_rhs(S, u, eps, nu2);
      worst = std::max(worst, (2.0 * hr[3] - orr.s11).max_abs());
      worst = std::max(worst, (2.0 * hr[4] - orr.s12).max_abs());
      worst = std::max(worst, (2.0 * hr[5] - orr.s22).max_abs());
      worst = std::max(worst, (hr[0] - orr.rho).max_abs());
    }
    b.check_le("hierarchy_matches_closed_form", worst, 1e-12);
  }

  {  // free energy decreases under quiescent relaxation
    PotentialSpec pot{1.0};
    MGrid g{48, 6.0};
    CutoffProfile cut{3.0};
    FokkerPlanckStepper st(4, 4, g, pot, cut, 1.0, 1.0);
    KineticDensity f = KineticDensity::product(
        4, 4, g, [](double, double) { return 1.0; },
        [](double m1, double m2) {
          double d1 = m1 - 0.8, d2 = m2 + 0.4;
          return std::exp(-(d1 * d1 + d2 * d2));
        });
    f.normalize(1.0);
    VectorField2D u(4, 4);
    double dt = st.suggest_dt(f, u).dt;
    double prev = free_energy(f, pot);
    double worst = -1e300;
    for (int i = 0; i < 50; ++i) {
      st.step_inplace(f, u, dt);
      double e = free_energy(f, pot);
      worst = std::max(worst, e - prev);
      prev = e;
    }
    b.check_le("free_energy_decay", worst, 1e-8);
  }

  {  // moment tables from nonnegative measures are dominated and psd
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
      auto mu = random_measure(rng, 6, false);
      MomentTable t = MomentTable::from_measure(mu, 8);
      if (t.domination_defect() > 1e-14) ok = false;
      if (!psd_check(t, 50, 4, seed + trial).passed) ok = false;
    }
    b.check("moment_domination_and_psd", ok, ok ? "20 random measures" : "violation");
  }

  return b.result;
}

SelftestResult moments_selftest(std::uint64_t seed) {
  Battery b;
  std::mt19937_64 rng(seed);

  {  // binomial transfer identities for Gaussian smoothing
    double worst = 0.0;
    std::uniform_real_distribution<double> del(0.05, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
      auto mu = random_measure(rng, 5, false);
      double delta = del(rng);
      MomentTable base = MomentTable::from_measure(mu, 6);
      MomentTable smooth = mollify(mu, delta, 6);
      worst = std::max(worst, std::abs(smooth.at(0, 0) - base.at(0, 0)));
      worst = std::max(worst, std::abs(smooth.at(1, 0) - base.at(1, 0)));
      worst = std::max(worst,
                       std::abs(smooth.at(2, 0) -
                                (base.at(2, 0) + delta * delta * base.at(0, 0))));
    }
    b.check_le("mollify_identities", worst, 1e-12);
  }

  {  // restoring-force cross positivity
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      auto mu1 = random_measure(rng, 4, false);
      auto mu2 = random_measure(rng, 4, false);
      for (int p = 0; p <= 3; ++p) {
        double s = 0.0;
        for (int bdeg = 0; bdeg <= 2 * p; ++bdeg)
          s += mu1.moment(2 * p - bdeg, bdeg) * mu2.moment(2 * p - bdeg, bdeg);
        worst = std::min(worst, s);
      }
    }
    b.check("restoring_force_positivity", worst >= -1e-12,
            "min cross sum " + std::to_string(worst));
  }

  {  // even-degree generating function is an equivalent norm
    bool ok = true;
    for (int trial = 0; trial < 100; ++trial) {
      auto mu = random_measure(rng, 5, false);
      MomentTable t = MomentTable::from_measure(mu, 12);
      auto norms = mbar_norms(t);
      double r = 0.3;
      double full = x_r_norm(norms, r, XrVariant::Full).value;
      double even = x_r_norm(norms, r, XrVariant::Even).value;
      if (!(even <= full * (1.0 + 1e-12) && full <= 3.0 * even * (1.0 + 1e-12)))
        ok = false;
    }
    b.check("norm_equivalence", ok, "F^e <= F <= 3 F^e on 100 tables");
  }

  {  // exponential-tail family: Mbar_k = (k+1)! c
    double worst = 0.0;
    double c = 0.7;
    for (int k = 0; k <= 8; ++k) {
      double expect = c * std::tgamma(double(k + 2));
      worst = std::max(worst,
                       std::abs(exponential_tail_mbar(k, c) - expect) / expect);
    }
    b.check_le("exponential_tail_moments", worst, 1e-10);
  }

  {  // stretched-Gaussian radial moments against the Gamma closed form
    double worst = 0.0;
    for (double q : {1.0, 2.0}) {
      for (int r = 0; r <= 3; ++r) {
        double c = 1.7;
        double expect = kPi / q * std::tgamma((r + 1.0) / q) * std::pow(c, r + 1);
        double got = stretched_gaussian_mbar2r(r, c, q);
        worst = std::max(worst, std::abs(got - expect) / expect);
      }
    }
    b.check_le("stretched_gaussian_moments", worst, 1e-10);
  }

  {  // signed measure flagged by the Riesz functional
    DiscreteMeasure mu;
    mu.signed_measure = true;
    mu.add(1.0, 0.0, 1.0);
    mu.add(0.0, 1.0, -1.0);
    MomentTable t = MomentTable::from_measure(mu, 4);
    PsdResult r = psd_check(t, 100, 2, seed);
    b.check("psd_detects_signed", !r.passed,
            r.passed ? "missed the signed measure"
                     : "witness value " + std::to_string(r.witness->value));
  }

  {  // unit point mass at (1,1): every growth term is 1
    DiscreteMeasure mu;
    mu.add(1.0, 1.0, 1.0);
    MomentTable t = MomentTable::from_measure(mu, 40);
    auto rep = carleman_partial_sums(t, 20);
    double err = 0.0;
    for (int n = 1; n <= 20; ++n)
      err = std::max(err, std::abs(rep.partial_sums_axis1[n - 1] - n));
    b.check_le("carleman_point_mass", err, 1e-12);
  }

  return b.result;
}

}  // namespace polykin
