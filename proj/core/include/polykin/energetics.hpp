#pragma once

#include <string>
#include <vector>

#include "polykin/kinetic.hpp"
#include "polykin/navier_stokes.hpp"

namespace polykin {

/// One diagnostics sample. CSV column order is fixed:
/// t, kinetic, free_energy, rel_entropy_global, rel_entropy_local,
/// fisher_m, fisher_x, trace_stress_l1, enstrophy.
struct EnergyReport {
  double t = 0.0;
  double kinetic = 0.0;             ///< (1/2) ||u||^2
  double free_energy = 0.0;         ///< int f log f + U f
  double rel_entropy_global = 0.0;  ///< int f log(f / (e^{-U}/Z))
  double rel_entropy_local = 0.0;   ///< int f log(f / (M00 e^{-U}/Z))
  double fisher_m = 0.0;            ///< eps int f |grad_m(log f + U)|^2
  double fisher_x = 0.0;            ///< nu2 int f |grad_x log f|^2
  double trace_stress_l1 = 0.0;     ///< ||Tr sigma||_{L1}
  double enstrophy = 0.0;           ///< (1/2) int omega^2

  static const char* csv_header();
  std::string csv_row() const;
};

/// int f log f + U f with the 0 log 0 = 0 convention.
double free_energy(const KineticDensity& f, const PotentialSpec& pot);
/// Same for a single configuration slice.
double free_energy_slice(const DensitySlice& s, const PotentialSpec& pot);

/// int f log(f / (mass-normalized global equilibrium)); >= 0 by Gibbs.
double rel_entropy_global(const KineticDensity& f, const PotentialSpec& pot);
/// int f log(f / (M00(x) e^{-U}/Z)); distance to local equilibrium.
double rel_entropy_local(const KineticDensity& f, const PotentialSpec& pot);

struct FisherPair {
  double fisher_m = 0.0;
  double fisher_x = 0.0;
};

/// Entropy-production integrals: configuration gradient by centered finite
/// differences, transport gradient spectrally; cells with f = 0 contribute
/// nothing (grad f / f := 0 there).
FisherPair fisher_dissipation(const KineticDensity& f, const PotentialSpec& pot,
                              double eps, double nu2);

/// ||f - g||_{L1} over x and m.
double l1_distance(const KineticDensity& f, const KineticDensity& g);
/// ||f(x,.) - slice||_{L1} where the slice is tensorized with the local mass.
double l1_distance_to_local(const KineticDensity& f,
                            const std::vector<double>& slice);

/// Full diagnostics sample for the coupled state.
EnergyReport energy_report(const FlowState& flow, const KineticDensity& f,
                           const PotentialSpec& pot, double eps, double nu2,
                           double q);

struct MonotonicityResult {
  bool passed = true;
  double worst_increment = 0.0;  ///< max one-sample increase
  int worst_index = -1;
  int max_consecutive_violations = 0;
};

/// Checks that (1/2)||u||^2 + K E[f] is non-increasing along the history
/// within per-step tolerance.
MonotonicityResult coupled_energy_check(const std::vector<EnergyReport>& hist,
                                        double K, double tol_per_step = 1e-6);

/// Checks that rel_entropy_local + (1/K) ||u||^2 is non-increasing within
/// tolerance; isolated violations are tolerated, three consecutive ones fail.
MonotonicityResult free_energy_estimate_check(
    const std::vector<EnergyReport>& hist, double K, double tol = 1e-5);

struct TraceBoundResult {
  bool passed = true;
  double worst_margin = 0.0;  ///< max over samples of lhs - rhs (<= 0 passes)
  double shear_trace_defect = 0.0;
};

/// Running bound: (1/2)||u||^2 + C ||Tr sigma||_{L1} + nu1 int ||grad u||^2
/// <= A ||M00||_{L1} t + initial value, with C = K/(2q(2q-1)) and
/// A = 2q(2q-1) (2q)^2 eps max(1, C); the pointwise constant uses
/// |m|^{2(q-1)} <= 1 + |m|^{4q-2}. Also verifies |sigma12| <= Tr(sigma)/2
/// pointwise through the recorded defect.
TraceBoundResult trace_stress_bound(const std::vector<EnergyReport>& hist,
                                    double K, double q, double eps, double nu1,
                                    double mass_l1,
                                    double worst_shear_defect = 0.0);

struct CkpResult {
  double kl = 0.0;     ///< int f log f - f log g - f + g
  double l1 = 0.0;     ///< ||f - g||_{L1}
  bool passed = true;  ///< kl >= l1^2 / 2 - 1e-12
};

/// Csiszar-Kullback-Pinsker comparison on configuration slices; inputs are
/// normalized to unit mass if needed (with a warning flag in the result).
CkpResult ckp_check(const std::vector<double>& f, const std::vector<double>& g,
                    const MGrid& grid);

}  // namespace polykin
