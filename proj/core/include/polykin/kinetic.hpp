#pragma once

#include <cstdint>
#include <limits>
#include <complex>
#include <string>
#include <vector>

#include "polykin/field.hpp"
#include "polykin/measure.hpp"
#include "polykin/mgrid.hpp"
#include "polykin/potential.hpp"
#include "polykin/stress.hpp"

namespace polykin {

struct StepRejected : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StabilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NormalizationLossError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nonnegative density f(x, m) on the periodic x-grid times the bounded
/// configuration box. Storage is configuration-major: for each m-cell the
/// x-grid values form one contiguous slab, so transport updates and moment
/// accumulations run at unit stride over x.
class KineticDensity {
public:
  KineticDensity(int nx, int ny, MGrid mgrid);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const MGrid& mgrid() const { return mgrid_; }
  double dx() const;

  std::size_t xpoints() const { return std::size_t(nx_) * ny_; }
  std::size_t size() const { return data_.size(); }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  std::size_t xindex(int ix, int iy) const { return std::size_t(ix) * ny_ + iy; }
  /// Contiguous x-slab of one configuration cell.
  double* slab(int i1, int i2) {
    return data_.data() + mgrid_.index(i1, i2) * xpoints();
  }
  const double* slab(int i1, int i2) const {
    return data_.data() + mgrid_.index(i1, i2) * xpoints();
  }
  double* slab(std::size_t mcell) { return data_.data() + mcell * xpoints(); }
  const double* slab(std::size_t mcell) const {
    return data_.data() + mcell * xpoints();
  }

  /// Gathered configuration block of one x-point (row-major over m).
  std::vector<double> column(int ix, int iy) const;
  /// Scatter a configuration block into one x-point.
  void set_column(int ix, int iy, const std::vector<double>& block);

  /// Total integral over x and m (deterministic slab-partial summation).
  double mass() const;
  double min_value() const;
  double max_value() const;

  /// f(x, m) = cx(x1, x2) * fm(m1, m2); no normalization applied.
  static KineticDensity product(int nx, int ny, MGrid mgrid,
                                const std::function<double(double, double)>& cx,
                                const std::function<double(double, double)>& fm);

  /// Scale so that mass() == target.
  void normalize(double target = 1.0);

private:
  int nx_, ny_;
  MGrid mgrid_;
  std::vector<double> data_;
};

/// Normalized equilibrium slice e^{-U}/Z on the m-grid.
struct EquilibriumSlice {
  std::vector<double> f;   ///< nm x nm, discrete integral 1
  double discrete_z = 0.0; ///< midpoint-quadrature partition value
  MGrid grid;
};

/// Discretizes e^{-U}/Z; fails with a normalization-loss error when the
/// continuum mass outside the box is non-negligible.
EquilibriumSlice equilibrium_density(const PotentialSpec& pot, const MGrid& g);

/// Kramer stress sigma(x) = 2q int |m|^{2(q-1)} m (x) m f dm.
StressField kramer_stress(const KineticDensity& f, double q);

/// rho(x) = M_{0,0}[f](x) as a spectral field.
SpectralField2D number_density(const KineticDensity& f);

/// Per-x moment table (midpoint quadrature).
MomentTable moments_at(const KineticDensity& f, int ix, int iy, int degree);

/// Per-degree L2(x) norms of the radial moments, for the generating-function
/// norms.
std::vector<double> mbar_l2_norms(const KineticDensity& f, int degree);

/// Moment fields M_{a,b}(x) for all a+b <= degree, ordered by (degree, b).
std::vector<SpectralField2D> extract_moment_fields(const KineticDensity& f,
                                                   int degree);

struct StepStats {
  double min_before_clip = 0.0;      ///< relative to max f
  double clipped_mass_rel = 0.0;     ///< clipped mass / total mass
  double renorm_factor = 1.0;
};

struct DtSuggestion {
  double dt = std::numeric_limits<double>::infinity();
  double dt_m_advection = std::numeric_limits<double>::infinity();
  double dt_m_diffusion = std::numeric_limits<double>::infinity();
  double dt_x_advection = std::numeric_limits<double>::infinity();
};

/// Strang-split Fokker-Planck integrator: half configuration-space step,
/// full spectral transport step, half configuration-space step.
///
/// The configuration-space substep is conservative finite-volume with
/// zero-flux walls: the restoring force and diffusion use the
/// exponential-fitting (Scharfetter-Gummel) flux built on the truncated
/// potential, which is upwind in the drift-dominated limit, centered in the
/// diffusion limit, and keeps e^{-Utilde} as its exact discrete steady
/// state; the flow stretching drift (grad u) m psi uses slope-limited upwind
/// fluxes. The transport substep is pseudo-spectral advection-diffusion
/// with an integrating factor for nu2 Laplacian_x and 2/3 dealiasing.
class FokkerPlanckStepper {
public:
  FokkerPlanckStepper(int nx, int ny, MGrid mgrid, PotentialSpec pot,
                      CutoffProfile cut, double eps, double nu2);
  ~FokkerPlanckStepper();
  FokkerPlanckStepper(const FokkerPlanckStepper&) = delete;
  FokkerPlanckStepper& operator=(const FokkerPlanckStepper&) = delete;

  const PotentialSpec& potential() const { return pot_; }
  const CutoffProfile& cutoff() const { return cut_; }
  double eps() const { return eps_; }
  double nu2() const { return nu2_; }

  /// CFL suggestion for the outer (full) step.
  DtSuggestion suggest_dt(const KineticDensity& f, const VectorField2D& u) const;

  /// One Strang step; throws StepRejected on a CFL violation and
  /// StabilityError when clipping exceeds tolerance. u must be
  /// divergence-free and is frozen over the step.
  StepStats step_inplace(KineticDensity& f, const VectorField2D& u, double dt);

  /// Equilibrium of the truncated dynamics on this grid (proportional to
  /// e^{-Utilde}); equals e^{-U}/Z wherever the cutoff is inactive.
  std::vector<double> truncated_equilibrium_slice() const;

  /// Accumulated clipping diagnostics.
  double total_clipped_mass() const { return total_clipped_; }
  std::uint64_t steps_taken() const { return steps_; }

private:
  int nx_, ny_;
  MGrid mg_;
  PotentialSpec pot_;
  CutoffProfile cut_;
  double eps_, nu2_;

  std::vector<double> psi_;          // cutoff at cell centers
  std::vector<double> utilde_;       // truncated potential at cell centers
  // Scharfetter-Gummel face factors per axis, premultiplied by eps/h:
  // flux = sgp f_left - sgm f_right.
  std::vector<double> sgp1_, sgm1_, sgp2_, sgm2_;
  // psi * m at face midpoints for the stretching drift.
  std::vector<double> fm1a_, fm1b_, fm2a_, fm2b_;
  double sg_rate_bound_;             // max per-cell outflow rate of the SG part

  double cached_dt_ = -1.0;
  std::vector<double> ifac_;         // integrating factor exp(-nu2 |k|^2 dt)
  // Batched transform plans for the transport substep (kBatch slabs and the
  // remainder batch).
  void* plan_fwd_ = nullptr;
  void* plan_inv_ = nullptr;
  void* plan_fwd_rem_ = nullptr;
  void* plan_inv_rem_ = nullptr;
  void exec_forward(std::size_t count, double* in, std::complex<double>* out) const;
  void exec_inverse(std::size_t count, std::complex<double>* in, double* out) const;

  std::uint64_t steps_ = 0;
  double total_clipped_ = 0.0;

  void m_substep(KineticDensity& f, double dt, const std::vector<double>& j11,
                 const std::vector<double>& j12, const std::vector<double>& j21,
                 const std::vector<double>& j22, bool axis1_first);
  void x_substep(KineticDensity& f, const VectorField2D& u, double dt);
  double m_stability_limit(const VectorField2D& u) const;
};

/// Pure wrapper around FokkerPlanckStepper::step_inplace.
KineticDensity fp_step(const KineticDensity& f, const VectorField2D& u,
                       const PotentialSpec& pot, const CutoffProfile& cut,
                       double eps, double nu2, double dt,
                       StepStats* stats = nullptr);

/// Convenience free-function form of the CFL suggestion.
DtSuggestion suggest_dt(const KineticDensity& f, const VectorField2D& u,
                        const PotentialSpec& pot, const CutoffProfile& cut,
                        double eps, double nu2);

struct CutoffComparisonEntry {
  double alpha = 0.0;
  double sigma_diff_rel = 0.0;   ///< vs previous alpha, relative L2
  double moment_diff_rel = 0.0;  ///< degree <= 2 moments vs previous alpha
};

struct CutoffComparisonReport {
  std::vector<CutoffComparisonEntry> entries;
  bool tail_bound_ok = true;     ///< pointwise |m|^{2k}(1-psi) tail estimate
  double tail_bound_worst = 0.0;
};

/// Evolves the same initial state under increasing cutoffs and reports the
/// Cauchy behaviour of the stress and of the low moments, plus the pointwise
/// truncation-tail estimate for the largest cutoff.
CutoffComparisonReport apply_cutoff_comparison(
    const KineticDensity& f0, const VectorField2D& u, const PotentialSpec& pot,
    double eps, double nu2, const std::vector<double>& alphas, double t_final);

}  // namespace polykin
