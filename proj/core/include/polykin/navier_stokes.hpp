#pragma once

#include "polykin/field.hpp"
#include "polykin/stress.hpp"

namespace polykin {

/// Streamfunction inversion u = grad^perp psi with Laplacian psi = omega and
/// zero-mean velocity. A nonzero-mean omega is projected out with a warning
/// counter rather than an error.
VectorField2D velocity_from_vorticity(const SpectralField2D& omega);

/// 2D incompressible flow in vorticity form,
/// d_t omega + u . grad omega = nu1 Laplacian omega + K grad^perp . (div sigma).
class FlowState {
public:
  FlowState(int nx, int ny) : omega_(nx, ny), u_(nx, ny), t_(0.0), u_ok_(false) {}

  int nx() const { return omega_.nx(); }
  int ny() const { return omega_.ny(); }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  const SpectralField2D& omega() const { return omega_; }
  void set_omega(SpectralField2D w);
  /// Velocity derived from the vorticity (cached).
  const VectorField2D& velocity() const;

private:
  SpectralField2D omega_;
  mutable VectorField2D u_;
  double t_;
  mutable bool u_ok_;
};

class NavierStokesStepper {
public:
  NavierStokesStepper(int nx, int ny, double nu1, double K);

  double nu1() const { return nu1_; }
  double forcing_constant() const { return K_; }

  /// CFL bound for the pseudo-spectral advection.
  double suggest_dt(const FlowState& s) const;

  /// One step with the integrating factor on nu1 Laplacian and RK2 on the
  /// advection; sigma is held fixed over the step. Throws StepRejected on a
  /// CFL violation.
  void step_inplace(FlowState& s, const StressField& sigma, double dt) const;

private:
  int nx_, ny_;
  double nu1_, K_;
  SpectralField2D nonlinear(const SpectralField2D& omega,
                            const VectorField2D& u) const;
  SpectralField2D curl_div(const StressField& sigma) const;
};

/// One step, pure form.
FlowState ns_step(const FlowState& s, const StressField& sigma, double nu1,
                  double K, double dt);

/// (1/2) int |u|^2 dx evaluated spectrally (Parseval).
double kinetic_energy(const FlowState& s);
/// int |grad u|^2 dx = int omega^2 dx for divergence-free 2D fields.
double velocity_gradient_l2sq(const FlowState& s);

}  // namespace polykin
