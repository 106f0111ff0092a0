#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "polykin/energetics.hpp"
#include "polykin/pathology.hpp"
#include "polykin/runner.hpp"

using namespace polykin;

namespace {

constexpr double kPi = std::numbers::pi;

KineticDensity local_equilibrium(int nx, const MGrid& g,
                                 const std::function<double(double, double)>& cx) {
  PotentialSpec pot{1.0};
  KineticDensity f = KineticDensity::product(nx, nx, g, cx, [&](double a, double b) {
    return std::exp(-pot.U(std::hypot(a, b))) / kPi;
  });
  return f;
}

}  // namespace

TEST_CASE("free energy closed forms") {
  PotentialSpec pot{1.0};
  MGrid g{96, 6.0};

  SUBCASE("normalized Gaussian slice: -log pi per unit mass") {
    std::vector<double> f(g.cells());
    for (int i = 0; i < g.nm; ++i)
      for (int j = 0; j < g.nm; ++j) {
        double r2 = g.center(i) * g.center(i) + g.center(j) * g.center(j);
        f[g.index(i, j)] = std::exp(-r2) / kPi;
      }
    double e = free_energy_slice({f.data(), g}, pot);
    CHECK(e == doctest::Approx(-std::log(kPi)).epsilon(1e-8));
  }

  SUBCASE("mass scaling identity: E[s f] = s E[f] + s log s mass") {
    std::vector<double> f(g.cells());
    for (int i = 0; i < g.nm; ++i)
      for (int j = 0; j < g.nm; ++j) {
        double m1 = g.center(i) - 0.4, m2 = g.center(j);
        f[g.index(i, j)] = std::exp(-(m1 * m1 + m2 * m2));
      }
    double mass = 0.0;
    for (double v : f) mass += v;
    mass *= g.cell_measure();
    double base = free_energy_slice({f.data(), g}, pot);
    double s = 1.7;
    std::vector<double> fs = f;
    for (double& v : fs) v *= s;
    double scaled = free_energy_slice({fs.data(), g}, pot);
    CHECK(scaled ==
          doctest::Approx(s * base + s * std::log(s) * mass).epsilon(1e-12));
  }

  SUBCASE("equilibrium minimizes among same-mass densities") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unif(0.2, 1.8);
    auto eq = equilibrium_density(pot, g);
    double e_eq = free_energy_slice({eq.f.data(), eq.grid}, pot);
    for (int trial = 0; trial < 50; ++trial) {
      // Random same-mass competitor: tilted and shifted Gaussian mixture.
      double a = unif(rng), b = unif(rng) - 1.0, c = unif(rng) - 1.0;
      std::vector<double> f(g.cells());
      double mass = 0.0;
      for (int i = 0; i < g.nm; ++i)
        for (int j = 0; j < g.nm; ++j) {
          double m1 = g.center(i), m2 = g.center(j);
          double v = std::exp(-a * ((m1 - b) * (m1 - b) + (m2 - c) * (m2 - c)));
          f[g.index(i, j)] = v;
          mass += v;
        }
      mass *= g.cell_measure();
      for (double& v : f) v /= mass;
      double e = free_energy_slice({f.data(), g}, pot);
      CHECK(e >= e_eq - 1e-10);
    }
  }
}

TEST_CASE("entropy-production integrals") {
  PotentialSpec pot{1.0};
  MGrid g{96, 6.0};

  SUBCASE("equilibrium produces nothing in m") {
    auto f = local_equilibrium(4, g, [](double, double) { return 1.0; });
    FisherPair fp = fisher_dissipation(f, pot, 1.0, 1.0);
    CHECK(fp.fisher_m <= 1e-10);
    CHECK(fp.fisher_x <= 1e-20);
  }

  SUBCASE("x-uniform data produces nothing in x") {
    KineticDensity f = KineticDensity::product(
        8, 8, g, [](double, double) { return 1.0; },
        [](double m1, double m2) { return std::exp(-2 * (m1 * m1 + m2 * m2)); });
    FisherPair fp = fisher_dissipation(f, pot, 1.0, 1.0);
    CHECK(fp.fisher_x <= 1e-20);
    CHECK(fp.fisher_m > 0.0);
  }

  SUBCASE("shifted Gaussian: |grad(log f + U)| = 2 |m0|") {
    const double m01 = 0.6, m02 = -0.3;
    KineticDensity f = KineticDensity::product(
        4, 4, g, [](double, double) { return 1.0; },
        [&](double m1, double m2) {
          double d1 = m1 - m01, d2 = m2 - m02;
          return std::exp(-(d1 * d1 + d2 * d2)) / kPi;
        });
    double mass = f.mass();
    FisherPair fp = fisher_dissipation(f, pot, 1.0, 0.0);
    double expect = 4.0 * (m01 * m01 + m02 * m02) * mass;
    CHECK(fp.fisher_m == doctest::Approx(expect).epsilon(1e-3));
  }

  SUBCASE("zero cells contribute nothing") {
    MGrid tiny{16, 4.0};
    KineticDensity f(4, 4, tiny);
    // Half the box empty, half a plateau: finite differences at the edge
    // must not blow up.
    for (int i = 0; i < tiny.nm / 2; ++i)
      for (int j = 0; j < tiny.nm; ++j) {
        double* s = f.slab(i, j);
        for (std::size_t c = 0; c < f.xpoints(); ++c) s[c] = 1.0;
      }
    FisherPair fp = fisher_dissipation(f, PotentialSpec{1.0}, 1.0, 1.0);
    CHECK(std::isfinite(fp.fisher_m));
    CHECK(fp.fisher_m >= 0.0);
  }
}

TEST_CASE("relative entropies") {
  PotentialSpec pot{1.0};
  MGrid g{64, 6.0};

  SUBCASE("global relative entropy vanishes exactly at uniform equilibrium") {
    auto f = local_equilibrium(8, g, [](double, double) { return 1.0; });
    f.normalize(1.0);
    CHECK(std::abs(rel_entropy_global(f, pot)) <= 1e-8);
    CHECK(std::abs(rel_entropy_local(f, pot)) <= 1e-8);
  }

  SUBCASE("nonnegativity on random local-equilibrium data") {
    auto f = local_equilibrium(8, g, [](double x1, double x2) {
      return 1.0 + 0.5 * std::sin(x1) * std::cos(x2);
    });
    f.normalize(1.0);
    CHECK(rel_entropy_global(f, pot) >= 0.0);
    // Local relative entropy sees only the m-shape, which is equilibrium.
    CHECK(std::abs(rel_entropy_local(f, pot)) <= 1e-8);
  }

  SUBCASE("chain rule: global = local + marginal term") {
    auto f = local_equilibrium(8, g, [](double x1, double x2) {
      return 1.0 + 0.5 * std::sin(x1) * std::cos(x2);
    });
    f.normalize(1.0);
    // Perturb the m-shape so the local part is nonzero too.
    {
      const MGrid& mg = f.mgrid();
      for (int i = 0; i < mg.nm; ++i) {
        double scale = 1.0 + 0.2 * std::tanh(mg.center(i));
        for (int j = 0; j < mg.nm; ++j) {
          double* s = f.slab(i, j);
          for (std::size_t c = 0; c < f.xpoints(); ++c) s[c] *= scale;
        }
      }
      f.normalize(1.0);
    }
    double global = rel_entropy_global(f, pot);
    double local = rel_entropy_local(f, pot);
    // Marginal relative entropy of M00 against the uniform density, with
    // the same mass matching as the global reference.
    SpectralField2D rho = number_density(f);
    const double volume = 4.0 * kPi * kPi;
    double mass = f.mass();
    double marginal = 0.0;
    for (double v : rho.values())
      if (v > 0.0) marginal += v * std::log(v * volume / mass);
    marginal *= rho.dx() * rho.dx();
    CHECK(global == doctest::Approx(local + marginal).epsilon(1e-10));
    CHECK(global >= -1e-12);
    CHECK(local >= -1e-12);
    CHECK(marginal >= -1e-12);
  }
}

TEST_CASE("distance-squared bound between densities") {
  MGrid g{64, 6.0};
  auto gaussian = [&](double s, double c1, double c2) {
    std::vector<double> f(g.cells());
    for (int i = 0; i < g.nm; ++i)
      for (int j = 0; j < g.nm; ++j) {
        double d1 = g.center(i) - c1, d2 = g.center(j) - c2;
        f[g.index(i, j)] = std::exp(-(d1 * d1 + d2 * d2) / (2 * s * s)) /
                           (2 * kPi * s * s);
      }
    return f;
  };

  SUBCASE("identical densities sit at zero") {
    auto f = gaussian(0.8, 0.0, 0.0);
    CkpResult r = ckp_check(f, f, g);
    CHECK(r.kl == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.l1 <= 1e-14);
    CHECK(r.passed);
  }
  SUBCASE("distinct Gaussians separate strictly") {
    auto f = gaussian(0.7, 0.5, 0.0);
    auto h = gaussian(1.0, 0.0, 0.0);
    CkpResult r = ckp_check(f, h, g);
    CHECK(r.kl > 0.5 * r.l1 * r.l1);
    CHECK(r.passed);
  }
  SUBCASE("a thousand random pairs satisfy the bound") {
    std::mt19937_64 rng(301);
    std::uniform_real_distribution<double> s(0.5, 1.4), c(-0.8, 0.8);
    for (int trial = 0; trial < 1000; ++trial) {
      auto f = gaussian(s(rng), c(rng), c(rng));
      auto h = gaussian(s(rng), c(rng), c(rng));
      CkpResult r = ckp_check(f, h, g);
      CHECK(r.passed);
    }
  }
  SUBCASE("nonpositive reference rejected") {
    auto f = gaussian(0.8, 0.0, 0.0);
    auto h = f;
    h[0] = 0.0;
    CHECK_THROWS_AS(ckp_check(f, h, g), std::domain_error);
  }
}

TEST_CASE("monotonicity checks over report histories") {
  auto series = [](std::initializer_list<double> vals) {
    std::vector<EnergyReport> hist;
    double t = 0.0;
    for (double v : vals) {
      EnergyReport r;
      r.t = t;
      t += 0.1;
      r.kinetic = v;
      r.free_energy = 0.0;
      r.rel_entropy_local = 0.0;
      hist.push_back(r);
    }
    return hist;
  };
  SUBCASE("clean decay passes") {
    auto h = series({1.0, 0.9, 0.8, 0.75});
    CHECK(coupled_energy_check(h, 1.0).passed);
  }
  SUBCASE("one large jump fails the per-step tolerance") {
    auto h = series({1.0, 0.9, 0.95, 0.8});
    auto res = coupled_energy_check(h, 1.0, 1e-6);
    CHECK(!res.passed);
    CHECK(res.worst_increment == doctest::Approx(0.05));
    CHECK(res.worst_index == 2);
  }
  SUBCASE("isolated small wiggles are tolerated by the entropy check") {
    std::vector<EnergyReport> h;
    for (int i = 0; i < 10; ++i) {
      EnergyReport r;
      r.t = 0.1 * i;
      r.kinetic = 0.0;
      r.rel_entropy_local = 1.0 - 0.05 * i + ((i % 4 == 2) ? 5e-6 : 0.0);
      h.push_back(r);
    }
    auto res = free_energy_estimate_check(h, 1.0, 1e-4);
    CHECK(res.passed);
    CHECK(res.max_consecutive_violations == 0);
  }
}

TEST_CASE("running stress bound bookkeeping") {
  std::vector<EnergyReport> h;
  for (int i = 0; i < 5; ++i) {
    EnergyReport r;
    r.t = 0.1 * i;
    r.kinetic = 0.5;
    r.trace_stress_l1 = 2.0;  // constant in time
    r.enstrophy = 0.0;
    h.push_back(r);
  }
  // Constant left side, growing right side: holds with slack.
  TraceBoundResult res = trace_stress_bound(h, 1.0, 1.0, 1.0, 1.0, 1.0, -0.1);
  CHECK(res.passed);
  CHECK(res.worst_margin <= 0.0);
  // A positive pointwise shear defect fails the check.
  TraceBoundResult bad = trace_stress_bound(h, 1.0, 1.0, 1.0, 1.0, 1.0, 1e-6);
  CHECK(!bad.passed);
}

TEST_CASE("heat-flow entropy demonstration") {
  using namespace pathology;
  SUBCASE("bump sizes satisfy the constraints") {
    double total = 0.0;
    for (int n = 1; n <= 200000; ++n) {
      double a = bump_halfwidth(n);
      CHECK(a < 0.5);
      total += a;
    }
    CHECK(total < 1.0);
    // The full series sums to one by construction of the constant.
    CHECK(bump_constant() > 0.45);
    CHECK(bump_constant() < 0.5);
  }
  SUBCASE("zero entropy at the initial time, exactly") {
    CHECK(entropy_pathology_demo(10, 0.0) == 0.0);
    CHECK(entropy_pathology_demo(1000000, 0.0) == 0.0);
  }
  SUBCASE("strictly negative and decreasing in the bump count") {
    double prev = 0.0;
    for (int n : {1, 2, 4, 8, 10}) {
      double e = entropy_quadrature(n, 1.0);
      CHECK(e < 0.0);
      CHECK(e < prev);
      prev = e;
    }
  }
  SUBCASE("analytic summation continues the decrease") {
    double quad = entropy_quadrature(1000, 1.0);
    double b1 = entropy_bound(10000);
    double b2 = entropy_bound(100000);
    double b3 = entropy_bound(1000000);
    CHECK(b1 < quad);
    CHECK(b2 < b1);
    CHECK(b3 < b2);
  }
  SUBCASE("quadrature tracks the per-bump asymptotic value") {
    // A single far bump of half-width a contributes about
    // 2 a log a - 2 a (1 - log 2 + (1/2) log(4 pi e)) for small a; compare
    // loosely at n = 1 where a ~ 0.49.
    double e1 = entropy_quadrature(1, 1.0);
    CHECK(e1 < -1.0);
    CHECK(e1 > -3.0);
  }
}
