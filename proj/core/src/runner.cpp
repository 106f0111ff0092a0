#include "polykin/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "polykin/snapshot.hpp"

namespace polykin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct LoopState {
  FlowState flow;
  std::optional<KineticDensity> f;
  std::optional<OldroydState> ob;
  std::optional<MomentFieldSet> mom;
  double t = 0.0;

  explicit LoopState(int nx) : flow(nx, nx) {}
};

struct Outputs {
  std::ofstream energy;
  std::ofstream closure;
  std::ofstream relaxcsv;
};

}  // namespace

SpectralField2D taylor_green_vorticity(int nx, int ny, double amplitude) {
  return SpectralField2D::sample(nx, ny, [amplitude](double x1, double x2) {
    return -2.0 * amplitude * std::cos(x1) * std::cos(x2);
  });
}

FlowState initial_flow(const SimConfig& c) {
  FlowState s(c.nx, c.nx);
  if (c.initial_u == InitialU::TaylorGreen)
    s.set_omega(taylor_green_vorticity(c.nx, c.nx, c.taylor_green_amplitude));
  return s;
}

std::function<double(double, double)> initial_m_profile(const SimConfig& c) {
  const PotentialSpec pot{c.q};
  switch (c.initial_f) {
    case InitialF::Equilibrium:
      return [pot](double m1, double m2) {
        return std::exp(-pot.U(std::hypot(m1, m2)));
      };
    case InitialF::StretchedGaussian: {
      double cc = c.stretch_c, q = c.q;
      return [cc, q](double m1, double m2) {
        return std::exp(-std::pow((m1 * m1 + m2 * m2) / cc, q));
      };
    }
    case InitialF::ExponentialTail: {
      double cc = c.tail_c;
      return [cc](double m1, double m2) { return cc * std::exp(-std::hypot(m1, m2)); };
    }
  }
  throw std::logic_error("initial_m_profile: unreachable");
}

KineticDensity initial_density(const SimConfig& c) {
  MGrid g{c.nm, c.lm};
  KineticDensity f = KineticDensity::product(
      c.nx, c.nx, g, [](double, double) { return 1.0; }, initial_m_profile(c));
  f.normalize(1.0);
  return f;
}

namespace {

RunResult run_impl(const SimConfig& cfg, bool freeze_flow,
                   std::vector<std::array<double, 3>>* relax_rows) {
  cfg.validate();
  RunResult res;
  res.output_dir = cfg.output_dir;

  const PotentialSpec pot{cfg.q};
  const CutoffProfile cut{cfg.effective_alpha()};
  const MGrid mg{cfg.nm, cfg.lm};

  const bool wants_kinetic =
      cfg.solver == SolverKind::Kinetic || cfg.solver == SolverKind::Both;
  const bool wants_ob =
      cfg.solver == SolverKind::OldroydB || cfg.solver == SolverKind::Both;
  const bool wants_hier = cfg.solver == SolverKind::Hierarchy;

  LoopState s(cfg.nx);
  if (!freeze_flow) s.flow = initial_flow(cfg);
  KineticDensity f0 = initial_density(cfg);
  if (wants_kinetic) s.f = f0;
  if (wants_ob) s.ob = OldroydState::from_kinetic(f0);
  if (wants_hier) {
    ClosureSpec cl;
    cl.kind = cfg.closure == ClosureKind::ExactHookean
                  ? ClosureSpec::Kind::ExactHookean
                  : (cfg.closure == ClosureKind::ZeroTruncation
                         ? ClosureSpec::Kind::ZeroTruncation
                         : ClosureSpec::Kind::EquilibriumFactorization);
    s.mom = MomentFieldSet::from_kinetic(f0, cfg.hierarchy_degree, cfg.q, cl);
  }

  std::optional<FokkerPlanckStepper> fp;
  if (wants_kinetic)
    fp.emplace(cfg.nx, cfg.nx, mg, pot, cut, cfg.epsilon, cfg.nu2);
  NavierStokesStepper ns(cfg.nx, cfg.nx, cfg.nu1, cfg.K);
  OldroydStepper obst(cfg.epsilon, cfg.nu2);
  HierarchyStepper hier(cfg.epsilon, cfg.nu2);

  res.mass_initial = wants_kinetic ? s.f->mass() : 1.0;

  auto forcing_stress = [&]() -> StressField {
    if (wants_kinetic) return kramer_stress(*s.f, cfg.q);
    if (wants_hier) return stress_from_moments(*s.mom, cfg.q);
    return s.ob->sigma;
  };

  // Fixed uniform dt chosen once: deterministic runs, exact landing on T.
  double dt = cfg.dt;
  if (cfg.dt_auto) {
    dt = cfg.sample_interval;
    if (!freeze_flow) dt = std::min(dt, ns.suggest_dt(s.flow));
    if (wants_kinetic)
      dt = std::min(dt, fp->suggest_dt(*s.f, s.flow.velocity()).dt);
    if (wants_ob || wants_hier)
      dt = std::min(dt, obst.suggest_dt(s.flow.velocity(), cfg.nx, cfg.nx));
    if (!std::isfinite(dt)) dt = cfg.T > 0.0 ? std::min(cfg.T, 0.01) : 0.01;
  }
  std::uint64_t n_steps =
      cfg.T > 0.0 ? std::uint64_t(std::ceil(cfg.T / dt - 1e-9)) : 0;
  if (n_steps > 0) dt = cfg.T / double(n_steps);
  res.dt_used = dt;
  std::uint64_t sample_every =
      std::max<std::uint64_t>(1, std::uint64_t(std::llround(cfg.sample_interval / dt)));
  std::uint64_t snap_every =
      cfg.snapshot_interval > 0.0
          ? std::max<std::uint64_t>(
                1, std::uint64_t(std::llround(cfg.snapshot_interval / dt)))
          : 0;

  std::filesystem::create_directories(cfg.output_dir);
  Outputs out;
  out.energy.open(cfg.output_dir + "/energy.csv");
  if (!out.energy) throw std::runtime_error("run: cannot write to " + cfg.output_dir);
  out.energy << EnergyReport::csv_header() << "\n";
  if (cfg.solver == SolverKind::Both) {
    out.closure.open(cfg.output_dir + "/closure.csv");
    out.closure << "t,l2_diff,linf_diff\n";
  }
  if (relax_rows) {
    out.relaxcsv.open(cfg.output_dir + "/relax.csv");
    out.relaxcsv << "t,l1_to_equilibrium,sigma_dev_max\n";
  }

  std::vector<double> eq_slice;
  if (wants_kinetic) {
    FokkerPlanckStepper& st = *fp;
    eq_slice = st.truncated_equilibrium_slice();
  }

  auto save_snapshot = [&](std::uint64_t step, const std::string& stem) {
    Snapshot snap;
    snap.config_hash = cfg.hash();
    snap.t = s.t;
    {
      Snapshot::Array arr;
      arr.dims = {std::uint64_t(cfg.nx), std::uint64_t(cfg.nx)};
      arr.data = s.flow.omega().values();
      snap.arrays.emplace("omega", std::move(arr));
    }
    if (s.f) {
      Snapshot::Array arr;
      // Stored configuration-major: dims (m1, m2, x1, x2).
      arr.dims = {std::uint64_t(cfg.nm), std::uint64_t(cfg.nm),
                  std::uint64_t(cfg.nx), std::uint64_t(cfg.nx)};
      arr.data.assign(s.f->data(), s.f->data() + s.f->size());
      snap.arrays.emplace("f", std::move(arr));
    }
    if (s.ob) {
      auto put = [&](const char* name, const SpectralField2D& fld) {
        Snapshot::Array arr;
        arr.dims = {std::uint64_t(cfg.nx), std::uint64_t(cfg.nx)};
        arr.data = fld.values();
        snap.arrays.emplace(name, std::move(arr));
      };
      put("sigma11", s.ob->sigma.s11);
      put("sigma12", s.ob->sigma.s12);
      put("sigma22", s.ob->sigma.s22);
      put("rho", s.ob->rho);
    }
    if (s.mom) {
      int k = 0;
      for (int d = 0; d <= s.mom->degree(); ++d)
        for (int b = 0; b <= d; ++b) {
          Snapshot::Array arr;
          arr.dims = {std::uint64_t(cfg.nx), std::uint64_t(cfg.nx)};
          arr.data = s.mom->fields()[k++].values();
          snap.arrays.emplace(
              "m_" + std::to_string(d - b) + "_" + std::to_string(b),
              std::move(arr));
        }
    }
    snap.save(cfg.output_dir + "/" + stem + "_" + std::to_string(step) + ".pksn");
  };

  auto sample = [&]() {
    EnergyReport rep;
    if (wants_kinetic) {
      rep = energy_report(s.flow, *s.f, pot, cfg.epsilon, cfg.nu2, cfg.q);
    } else {
      rep.t = s.t;
      rep.kinetic = kinetic_energy(s.flow);
      rep.enstrophy = 0.5 * velocity_gradient_l2sq(s.flow);
      rep.trace_stress_l1 = forcing_stress().trace_l1();
    }
    rep.t = s.t;
    out.energy << rep.csv_row() << "\n";
    res.energy_history.push_back(rep);

    StressField sig = forcing_stress();
    res.worst_shear_defect =
        std::max(res.worst_shear_defect, sig.shear_trace_defect());

    if (cfg.solver == SolverKind::Both) {
      ClosureRow c;
      c.t = s.t;
      auto reprt = closure_consistency_check(*s.f, *s.ob, cfg.q);
      c.l2_diff = reprt.l2_diff;
      c.linf_diff = reprt.linf_diff;
      c.l2_rel = reprt.l2_rel;
      res.closure_history.push_back(c);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", c.t, c.l2_diff,
                    c.linf_diff);
      out.closure << buf << "\n";
      res.final_closure_rel = c.l2_rel;
    }

    if (relax_rows && wants_kinetic) {
      double l1 = l1_distance_to_local(*s.f, eq_slice);
      SpectralField2D rho = number_density(*s.f);
      const auto& rv = rho.values();
      const auto& a = sig.s11.values();
      const auto& b = sig.s12.values();
      const auto& c2 = sig.s22.values();
      double dev = 0.0;
      for (std::size_t i = 0; i < rv.size(); ++i) {
        if (rv[i] <= 0.0) continue;
        dev = std::max({dev, std::abs(a[i] / rv[i] - 1.0),
                        std::abs(b[i] / rv[i]), std::abs(c2[i] / rv[i] - 1.0)});
      }
      relax_rows->push_back({s.t, l1, dev});
      char buf[128];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", s.t, l1, dev);
      out.relaxcsv << buf << "\n";
    }
  };

  sample();

  int consecutive_rejects = 0;
  std::uint64_t step = 0;
  while (step < n_steps) {
    try {
      // Stress from the state at t_n forces the flow to t_{n+1}; the
      // configuration states then advance under u(t_{n+1}).
      if (std::abs(s.flow.time() - s.t) > 1e-10 * std::max(1.0, s.t))
        throw std::logic_error("run: flow and polymer clocks diverged");
      if (!freeze_flow) {
        StressField sig = forcing_stress();
        sig.dealias_all();
        ns.step_inplace(s.flow, sig, dt);
      } else {
        s.flow.set_time(s.flow.time() + dt);
      }
      const VectorField2D& u = s.flow.velocity();
      if (wants_kinetic) fp->step_inplace(*s.f, u, dt);
      if (wants_ob) obst.step_inplace(*s.ob, u, dt);
      if (wants_hier) hier.step_inplace(*s.mom, u, dt);
      s.t += dt;
      ++step;
      consecutive_rejects = 0;
    } catch (const StepRejected& e) {
      ++consecutive_rejects;
      if (consecutive_rejects >= 3) {
        save_snapshot(step, "state_abort");
        res.ok = false;
        res.message = std::string("aborted after 3 consecutive step rejections: ") +
                      e.what();
        break;
      }
      // Halve the step for the remaining time and keep the clocks aligned.
      double remaining = cfg.T - s.t;
      std::uint64_t left = std::uint64_t(std::ceil(remaining / (0.5 * dt) - 1e-9));
      dt = remaining / double(left);
      n_steps = step + left;
      sample_every = std::max<std::uint64_t>(
          1, std::uint64_t(std::llround(cfg.sample_interval / dt)));
      if (snap_every > 0)
        snap_every = std::max<std::uint64_t>(
            1, std::uint64_t(std::llround(cfg.snapshot_interval / dt)));
      continue;
    }
    if (step % sample_every == 0 || step == n_steps) sample();
    if (snap_every > 0 && step % snap_every == 0) save_snapshot(step, "state");
  }

  if (res.ok && n_steps > 0) save_snapshot(n_steps, "state");
  res.steps = step;
  res.final_time = s.t;
  res.mass_final = wants_kinetic ? s.f->mass() : 1.0;
  res.mass_drift_rel =
      std::abs(res.mass_final - res.mass_initial) / std::max(res.mass_initial, 1e-300);
  if (wants_kinetic) res.total_clipped_mass = fp->total_clipped_mass();
  if (!cfg.quiet) {
    std::printf("run: %s solver, %llu steps, dt = %.3e, t = %.6g, mass drift = %.3e\n",
                to_string(cfg.solver), (unsigned long long)res.steps, res.dt_used,
                res.final_time, res.mass_drift_rel);
  }
  return res;
}

}  // namespace

RunResult run(const SimConfig& config) { return run_impl(config, false, nullptr); }

RunResult verify_closure(const SimConfig& config) {
  SimConfig cfg = config;
  cfg.solver = SolverKind::Both;
  cfg.validate();
  return run_impl(cfg, false, nullptr);
}

RelaxResult relax(const SimConfig& config) {
  SimConfig cfg = config;
  cfg.solver = SolverKind::Kinetic;
  cfg.initial_u = InitialU::Zero;
  cfg.validate();

  RelaxResult rr;
  std::vector<std::array<double, 3>> rows;
  rr.base = run_impl(cfg, true, &rows);
  if (!rows.empty()) {
    rr.l1_initial = rows.front()[1];
    rr.l1_final = rows.back()[1];
    rr.sigma_dev_max = rows.back()[2];
  }

  // Compare the final stress against the closed-form relaxation of the
  // Hookean second-moment system from the same discrete initial stress.
  if (cfg.q == 1.0) {
    KineticDensity f0 = initial_density(cfg);
    StressField sig0 = kramer_stress(f0, cfg.q);
    SpectralField2D rho0 = number_density(f0);
    // Re-run is avoided: the run wrote snapshots; recompute final stress from
    // the relax run by evolving nothing here. Instead the driver recorded
    // sigma deviations; the analytic error needs the final fields, so redo
    // the comparison via one more pass over the stored final snapshot.
    Snapshot snap = Snapshot::load(cfg.output_dir + "/state_" +
                                   std::to_string(rr.base.steps) + ".pksn");
    const auto& fa = snap.arrays.at("f");
    KineticDensity ff(cfg.nx, cfg.nx, MGrid{cfg.nm, cfg.lm});
    std::copy(fa.data.begin(), fa.data.end(), ff.data());
    StressField sigT = kramer_stress(ff, cfg.q);
    SpectralField2D rhoT = number_density(ff);
    double decay = std::exp(-kHookeanRelaxRate * cfg.epsilon * rr.base.final_time);
    const auto& r0 = rho0.values();
    const auto& rT = rhoT.values();
    double err = 0.0;
    auto cmp = [&](const SpectralField2D& s0, const SpectralField2D& sT,
                   double iso) {
      const auto& a0 = s0.values();
      const auto& aT = sT.values();
      for (std::size_t i = 0; i < a0.size(); ++i) {
        if (rT[i] <= 0.0) continue;
        double predicted = iso + (a0[i] / r0[i] - iso) * decay;
        err = std::max(err, std::abs(aT[i] / rT[i] - predicted));
      }
    };
    cmp(sig0.s11, sigT.s11, 1.0);
    cmp(sig0.s12, sigT.s12, 0.0);
    cmp(sig0.s22, sigT.s22, 1.0);
    rr.ob_analytic_err = err;
  }
  return rr;
}

}  // namespace polykin
