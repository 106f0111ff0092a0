#pragma once

#include <optional>
#include <string>
#include <vector>

#include "polykin/config.hpp"
#include "polykin/energetics.hpp"
#include "polykin/hierarchy.hpp"
#include "polykin/kinetic.hpp"
#include "polykin/navier_stokes.hpp"

namespace polykin {

// Named initial scenarios.
SpectralField2D taylor_green_vorticity(int nx, int ny, double amplitude);
FlowState initial_flow(const SimConfig& c);
/// Configuration-space profile of the named scenario (unnormalized).
std::function<double(double, double)> initial_m_profile(const SimConfig& c);
/// Full initial density, normalized to total mass 1.
KineticDensity initial_density(const SimConfig& c);

struct ClosureRow {
  double t = 0.0;
  double l2_diff = 0.0;
  double linf_diff = 0.0;
  double l2_rel = 0.0;
};

struct RunResult {
  bool ok = true;
  std::string message;
  std::uint64_t steps = 0;
  double final_time = 0.0;
  double dt_used = 0.0;
  std::vector<EnergyReport> energy_history;
  std::vector<ClosureRow> closure_history;  ///< solver = both only
  double mass_initial = 0.0;
  double mass_final = 0.0;
  double mass_drift_rel = 0.0;
  double worst_shear_defect = 0.0;  ///< max |sigma12| - Tr/2 over samples
  double final_closure_rel = 0.0;   ///< solver = both only
  double total_clipped_mass = 0.0;
  std::string output_dir;
};

/// Full coupled run as configured; writes energy.csv (plus closure.csv for
/// solver=both and state_<step>.pksn snapshots) under output_dir.
/// Deterministic for a fixed config.
RunResult run(const SimConfig& config);

/// Kinetic vs closed-form stress comparison under the shared velocity driven
/// by the kinetic stress (forces solver = both; requires q = 1).
RunResult verify_closure(const SimConfig& config);

struct RelaxResult {
  RunResult base;
  double l1_initial = 0.0;
  double l1_final = 0.0;
  double sigma_dev_max = 0.0;      ///< max |sigma/rho - I| at final time
  double ob_analytic_err = 0.0;    ///< vs rho I + (sigma0 - rho I) e^{-4 eps t}
};

/// Quiescent-flow relaxation study (u identically zero, kinetic solver).
RelaxResult relax(const SimConfig& config);

}  // namespace polykin
