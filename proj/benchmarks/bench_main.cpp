#include <benchmark/benchmark.h>

#include <cmath>

#include "polykin/energetics.hpp"
#include "polykin/hierarchy.hpp"
#include "polykin/kinetic.hpp"
#include "polykin/navier_stokes.hpp"
#include "polykin/runner.hpp"

using namespace polykin;

namespace {

SimConfig bench_config(int nx, int nm) {
  SimConfig c;
  c.nx = nx;
  c.nm = nm;
  c.lm = 6.0;
  c.quiet = true;
  return c;
}

struct KineticFixture {
  SimConfig cfg;
  KineticDensity f;
  FlowState flow;
  FokkerPlanckStepper stepper;
  double dt;

  explicit KineticFixture(int nx, int nm)
      : cfg(bench_config(nx, nm)),
        f(initial_density(cfg)),
        flow(nx, nx),
        stepper(nx, nx, MGrid{cfg.nm, cfg.lm}, PotentialSpec{1.0},
                CutoffProfile{3.0}, 1.0, 1.0) {
    flow.set_omega(taylor_green_vorticity(nx, nx, 0.5));
    dt = stepper.suggest_dt(f, flow.velocity()).dt;
  }
};

void BM_FpStep(benchmark::State& state) {
  KineticFixture fx(int(state.range(0)), int(state.range(1)));
  for (auto _ : state) {
    fx.stepper.step_inplace(fx.f, fx.flow.velocity(), fx.dt);
  }
  state.SetItemsProcessed(state.iterations() * fx.f.size());
}
BENCHMARK(BM_FpStep)->Args({32, 64})->Args({32, 128})->Unit(benchmark::kMillisecond);

void BM_KramerStress(benchmark::State& state) {
  KineticFixture fx(int(state.range(0)), int(state.range(1)));
  for (auto _ : state) {
    StressField s = kramer_stress(fx.f, 1.0);
    benchmark::DoNotOptimize(s.s11.values().data());
  }
}
BENCHMARK(BM_KramerStress)->Args({32, 64})->Args({32, 128})->Unit(benchmark::kMillisecond);

void BM_EnergyReport(benchmark::State& state) {
  KineticFixture fx(int(state.range(0)), int(state.range(1)));
  for (auto _ : state) {
    EnergyReport r = energy_report(fx.flow, fx.f, PotentialSpec{1.0}, 1.0, 1.0, 1.0);
    benchmark::DoNotOptimize(r);
  }
}
BENCHMARK(BM_EnergyReport)->Args({32, 64})->Unit(benchmark::kMillisecond);

void BM_NsStep(benchmark::State& state) {
  const int n = int(state.range(0));
  FlowState s(n, n);
  s.set_omega(taylor_green_vorticity(n, n, 0.5));
  NavierStokesStepper ns(n, n, 1.0, 1.0);
  StressField sigma(n, n);
  double dt = 0.5 * ns.suggest_dt(s);
  for (auto _ : state) {
    ns.step_inplace(s, sigma, dt);
  }
}
BENCHMARK(BM_NsStep)->Arg(32)->Arg(128)->Unit(benchmark::kMicrosecond);

void BM_OldroydStep(benchmark::State& state) {
  const int n = int(state.range(0));
  OldroydState S(n, n);
  S.rho = SpectralField2D::sample(n, n, [](double, double) { return 1.0; });
  S.sigma.s11 = S.rho;
  S.sigma.s22 = S.rho;
  FlowState flow(n, n);
  flow.set_omega(taylor_green_vorticity(n, n, 0.5));
  OldroydStepper st(1.0, 1.0);
  for (auto _ : state) {
    st.step_inplace(S, flow.velocity(), 1e-3);
  }
}
BENCHMARK(BM_OldroydStep)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_MomentExtraction(benchmark::State& state) {
  KineticFixture fx(8, int(state.range(0)));
  for (auto _ : state) {
    auto fields = extract_moment_fields(fx.f, 2);
    benchmark::DoNotOptimize(fields.data());
  }
}
BENCHMARK(BM_MomentExtraction)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
