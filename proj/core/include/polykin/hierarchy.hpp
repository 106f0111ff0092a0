#pragma once

#include <vector>

#include "polykin/field.hpp"
#include "polykin/kinetic.hpp"
#include "polykin/stress.hpp"

namespace polykin {

/// How moments above the table degree are replaced when the restoring term
/// raises the degree (only possible for q > 1; the q = 1 hierarchy closes
/// degree by degree).
struct ClosureSpec {
  enum class Kind { ExactHookean, ZeroTruncation, EquilibriumFactorization };
  Kind kind = Kind::ExactHookean;

  static const char* name(Kind k);
  /// Exact only at equilibrium; q > 1 runs carry an "uncontrolled
  /// approximation" label in reports.
  bool uncontrolled(double q) const { return q > 1.0; }
};

/// Macroscopic state: moment fields M_{a,b}(x) for all a+b <= degree,
/// ordered by (a+b, b).
class MomentFieldSet {
public:
  MomentFieldSet(int nx, int ny, int degree, double q, ClosureSpec closure);

  static MomentFieldSet from_kinetic(const KineticDensity& f, int degree,
                                     double q, ClosureSpec closure);

  int nx() const { return fields_[0].nx(); }
  int ny() const { return fields_[0].ny(); }
  int degree() const { return degree_; }
  double q() const { return q_; }
  const ClosureSpec& closure() const { return closure_; }

  SpectralField2D& field(int a, int b);
  const SpectralField2D& field(int a, int b) const;
  std::vector<SpectralField2D>& fields() { return fields_; }
  const std::vector<SpectralField2D>& fields() const { return fields_; }

  /// Pointwise value of M_{a,b}; negative indices give 0, degrees above the
  /// table go through the closure.
  double closed_value(int a, int b, std::size_t i) const;

private:
  int degree_;
  double q_;
  ClosureSpec closure_;
  std::vector<SpectralField2D> fields_;
};

/// Full time derivative of every moment field:
/// dM_{a,b}/dt = -u . grad M_{a,b} + nu2 Laplacian M_{a,b}
///   - 2 q eps (a+b) M_{a,b}[|m|^{2(q-1)} mu]
///   + eps (a(a-1) M_{a-2,b} + b(b-1) M_{a,b-2})
///   + a J11 M_{a,b} + a J12 M_{a-1,b+1} + b J21 M_{a+1,b-1} + b J22 M_{a,b},
/// with J_ab = du_a/dx_b and (m1^2+m2^2)^{q-1} expanded binomially. Requires
/// integer q when q > 1.
std::vector<SpectralField2D> hierarchy_rhs(const MomentFieldSet& M,
                                           const VectorField2D& u, double eps,
                                           double nu2);

/// sigma_ij = 2q sum_j C(q-1, j) M_{..} of total degree 2q. For q = 1:
/// sigma11 = 2 M20, sigma12 = 2 M11, sigma22 = 2 M02.
StressField stress_from_moments(const MomentFieldSet& M, double q);

/// Advances the moment fields with the same integrator family as the flow
/// solver (RK2 on advection and sources, integrating factor on nu2).
class HierarchyStepper {
public:
  HierarchyStepper(double eps, double nu2) : eps_(eps), nu2_(nu2) {}
  void step_inplace(MomentFieldSet& M, const VectorField2D& u, double dt) const;

private:
  double eps_, nu2_;
};

/// Closed macroscopic state for the Hookean potential: stress and number
/// density. The evolution is the exact second-moment closure of the kinetic
/// equation with U = |m|^2,
///   d_t sigma + u . grad sigma =
///     J sigma + sigma J^T - 4 eps sigma + 4 eps rho I + nu2 Laplacian sigma,
///   d_t rho + u . grad rho = nu2 Laplacian rho.
struct OldroydState {
  StressField sigma;
  SpectralField2D rho;
  double t = 0.0;

  OldroydState(int nx, int ny) : sigma(nx, ny), rho(nx, ny) {}
  static OldroydState from_kinetic(const KineticDensity& f);
};

/// Relaxation rate of the stress deviation sigma - rho I under the Hookean
/// closure (per unit eps); sigma(t) = rho I + (sigma0 - rho I) e^{-rate eps t}
/// for u = 0 and uniform rho.
inline constexpr double kHookeanRelaxRate = 4.0;

struct OldroydRhs {
  SpectralField2D s11, s12, s22, rho;
};

/// Full time derivative of (sigma, rho); q = 1 semantics only.
OldroydRhs oldroyd_rhs(const OldroydState& S, const VectorField2D& u,
                       double eps, double nu2);

class OldroydStepper {
public:
  OldroydStepper(double eps, double nu2) : eps_(eps), nu2_(nu2) {}
  double suggest_dt(const VectorField2D& u, int nx, int ny) const;
  void step_inplace(OldroydState& S, const VectorField2D& u, double dt) const;

private:
  double eps_, nu2_;
};

/// Pure single-step form.
OldroydState oldroyd_b_step(const OldroydState& S, const VectorField2D& u,
                            double eps, double nu2, double dt);

struct ClosureReport {
  double l2_diff = 0.0;
  double linf_diff = 0.0;
  double l2_rel = 0.0;
};

/// L2 / Linf distance between the kinetic stress and the moment-route
/// stress; configuration error on mismatched grids.
ClosureReport closure_consistency_check(const KineticDensity& f,
                                        const MomentFieldSet& M);
ClosureReport closure_consistency_check(const KineticDensity& f,
                                        const OldroydState& S, double q);

}  // namespace polykin
