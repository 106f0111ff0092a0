#include "polykin/navier_stokes.hpp"

#include <cmath>
#include <numbers>

#include "polykin/kinetic.hpp"  // StepRejected

namespace polykin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

VectorField2D velocity_from_vorticity(const SpectralField2D& omega) {
  SpectralField2D w = omega;
  {
    auto& c = w.mutable_coeffs();
    c[0] = 0.0;  // zero-mean gauge on the torus
  }
  SpectralField2D psi = inverse_laplacian(w);
  // u = grad^perp psi = (-d2 psi, d1 psi)
  return VectorField2D(-1.0 * derivative(psi, 1), derivative(psi, 0));
}

void FlowState::set_omega(SpectralField2D w) {
  omega_ = std::move(w);
  u_ok_ = false;
}

const VectorField2D& FlowState::velocity() const {
  if (!u_ok_) {
    u_ = velocity_from_vorticity(omega_);
    u_ok_ = true;
  }
  return u_;
}

NavierStokesStepper::NavierStokesStepper(int nx, int ny, double nu1, double K)
    : nx_(nx), ny_(ny), nu1_(nu1), K_(K) {}

SpectralField2D NavierStokesStepper::nonlinear(const SpectralField2D& omega,
                                               const VectorField2D& u) const {
  // -div(u omega), computed in divergence form so the mean is exactly zero.
  SpectralField2D p1 = multiply_dealias(u.u1, omega);
  SpectralField2D p2 = multiply_dealias(u.u2, omega);
  return -1.0 * (derivative(p1, 0) + derivative(p2, 1));
}

SpectralField2D NavierStokesStepper::curl_div(const StressField& sigma) const {
  // grad^perp . (div sigma) = d1 d2 (s22 - s11) + (d1^2 - d2^2) s12
  SpectralField2D out(nx_, ny_);
  auto& d = out.mutable_coeffs();
  const auto& a = sigma.s11.coeffs();
  const auto& b = sigma.s12.coeffs();
  const auto& c = sigma.s22.coeffs();
  const int nyh = ny_ / 2 + 1;
  for (int j0 = 0; j0 < nx_; ++j0) {
    double k1 = j0 == nx_ / 2 ? 0.0 : wavenumber(j0, nx_);
    for (int j1 = 0; j1 < nyh; ++j1) {
      double k2 = j1 == ny_ / 2 ? 0.0 : j1;
      std::size_t i = std::size_t(j0) * nyh + j1;
      d[i] = -k1 * k2 * (c[i] - a[i]) - (k1 * k1 - k2 * k2) * b[i];
    }
  }
  return out;
}

double NavierStokesStepper::suggest_dt(const FlowState& s) const {
  double umax = s.velocity().max_abs();
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * (kTwoPi / std::max(nx_, ny_)) / umax;
}

void NavierStokesStepper::step_inplace(FlowState& s, const StressField& sigma,
                                       double dt) const {
  double umax = s.velocity().max_abs();
  if (umax > 0.0 && dt > (kTwoPi / std::max(nx_, ny_)) / umax)
    throw StepRejected("ns_step: CFL violated at dt = " + std::to_string(dt));

  const int nyh = ny_ / 2 + 1;
  std::vector<double> ifac(std::size_t(nx_) * nyh);
  for (int j0 = 0; j0 < nx_; ++j0) {
    double k1 = wavenumber(j0, nx_);
    for (int j1 = 0; j1 < nyh; ++j1) {
      double k2 = j1;
      ifac[std::size_t(j0) * nyh + j1] = std::exp(-nu1_ * (k1 * k1 + k2 * k2) * dt);
    }
  }

  SpectralField2D force = curl_div(sigma);
  force *= K_;

  SpectralField2D n1 = nonlinear(s.omega(), s.velocity());
  SpectralField2D stage(nx_, ny_);
  {
    auto& d = stage.mutable_coeffs();
    const auto& w = s.omega().coeffs();
    const auto& n = n1.coeffs();
    const auto& g = force.coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (w[i] + dt * (n[i] + g[i]));
  }
  FlowState star(nx_, ny_);
  star.set_omega(stage);
  SpectralField2D n2 = nonlinear(star.omega(), star.velocity());

  SpectralField2D next(nx_, ny_);
  {
    auto& d = next.mutable_coeffs();
    const auto& w = s.omega().coeffs();
    const auto& na = n1.coeffs();
    const auto& nb = n2.coeffs();
    const auto& g = force.coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (w[i] + 0.5 * dt * (na[i] + g[i])) +
             0.5 * dt * (nb[i] + g[i]);
  }
  s.set_omega(std::move(next));
  s.set_time(s.time() + dt);
}

FlowState ns_step(const FlowState& s, const StressField& sigma, double nu1,
                  double K, double dt) {
  NavierStokesStepper st(s.nx(), s.ny(), nu1, K);
  FlowState out = s;
  st.step_inplace(out, sigma, dt);
  return out;
}

double kinetic_energy(const FlowState& s) {
  const VectorField2D& u = s.velocity();
  return 0.5 * kTwoPi * kTwoPi * (spectral_power(u.u1) + spectral_power(u.u2));
}

double velocity_gradient_l2sq(const FlowState& s) {
  return kTwoPi * kTwoPi * spectral_power(s.omega());
}

}  // namespace polykin
