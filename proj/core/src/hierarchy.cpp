#include "polykin/hierarchy.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polykin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

int tri_index(int a, int b) {
  int d = a + b;
  return d * (d + 1) / 2 + b;
}

/// -div(u f) + nu2 Laplacian f, pseudo-spectral, dealiased.
SpectralField2D transport_rhs(const SpectralField2D& f, const VectorField2D& u,
                              double nu2) {
  SpectralField2D adv = -1.0 * (derivative(multiply_dealias(u.u1, f), 0) +
                                derivative(multiply_dealias(u.u2, f), 1));
  if (nu2 != 0.0) adv += nu2 * laplacian(f);
  return adv;
}

}  // namespace

const char* ClosureSpec::name(Kind k) {
  switch (k) {
    case Kind::ExactHookean: return "exact_hookean";
    case Kind::ZeroTruncation: return "zero_truncation";
    case Kind::EquilibriumFactorization: return "equilibrium_factorization";
  }
  return "?";
}

MomentFieldSet::MomentFieldSet(int nx, int ny, int degree, double q,
                               ClosureSpec closure)
    : degree_(degree), q_(q), closure_(closure) {
  if (degree < 0) throw std::invalid_argument("MomentFieldSet: negative degree");
  if (closure.kind == ClosureSpec::Kind::ExactHookean && q != 1.0)
    throw std::invalid_argument("exact closure requires q=1");
  int count = (degree + 1) * (degree + 2) / 2;
  fields_.reserve(count);
  for (int i = 0; i < count; ++i) fields_.emplace_back(nx, ny);
}

MomentFieldSet MomentFieldSet::from_kinetic(const KineticDensity& f, int degree,
                                            double q, ClosureSpec closure) {
  MomentFieldSet M(f.nx(), f.ny(), degree, q, closure);
  M.fields_ = extract_moment_fields(f, degree);
  return M;
}

SpectralField2D& MomentFieldSet::field(int a, int b) {
  if (a < 0 || b < 0 || a + b > degree_)
    throw CapacityError("MomentFieldSet: index out of range");
  return fields_[tri_index(a, b)];
}

const SpectralField2D& MomentFieldSet::field(int a, int b) const {
  if (a < 0 || b < 0 || a + b > degree_)
    throw CapacityError("MomentFieldSet: index out of range");
  return fields_[tri_index(a, b)];
}

double MomentFieldSet::closed_value(int a, int b, std::size_t i) const {
  if (a < 0 || b < 0) return 0.0;
  if (a + b <= degree_) return fields_[tri_index(a, b)].values()[i];
  switch (closure_.kind) {
    case ClosureSpec::Kind::ExactHookean:
      throw CapacityError("exact_hookean closure hit an out-of-range moment");
    case ClosureSpec::Kind::ZeroTruncation:
      return 0.0;
    case ClosureSpec::Kind::EquilibriumFactorization:
      return fields_[0].values()[i] * equilibrium_moment(a, b, q_);
  }
  return 0.0;
}

std::vector<SpectralField2D> hierarchy_rhs(const MomentFieldSet& M,
                                           const VectorField2D& u, double eps,
                                           double nu2) {
  const double q = M.q();
  const int qi = int(q);
  if (q > 1.0 && double(qi) != q)
    throw std::invalid_argument(
        "hierarchy_rhs: non-integer q is unsupported by the moment solver; "
        "use the kinetic solver");

  Jacobian jac = velocity_jacobian(u);
  const auto& j11 = jac.j11.values();
  const auto& j12 = jac.j12.values();
  const auto& j21 = jac.j21.values();
  const auto& j22 = jac.j22.values();

  std::vector<SpectralField2D> out;
  out.reserve(M.fields().size());

  for (int d = 0; d <= M.degree(); ++d) {
    for (int b = 0; b <= d; ++b) {
      int a = d - b;
      SpectralField2D rhs = transport_rhs(M.field(a, b), u, nu2);
      auto& rv = rhs.mutable_values();

      // Restoring term: M_{a,b}[|m|^{2(q-1)} mu] expanded binomially.
      if (eps != 0.0 && d > 0) {
        const double pref = -2.0 * q * eps * d;
        for (int j = 0; j <= qi - 1; ++j) {
          double cj = pref * binomial(qi - 1, j);
          int aa = a + 2 * j, bb = b + 2 * (qi - 1 - j);
          if (aa + bb <= M.degree()) {
            const auto& mv = M.field(aa, bb).values();
            for (std::size_t i = 0; i < rv.size(); ++i) rv[i] += cj * mv[i];
          } else {
            for (std::size_t i = 0; i < rv.size(); ++i)
              rv[i] += cj * M.closed_value(aa, bb, i);
          }
        }
      }

      // Configuration-space diffusion sources.
      if (eps != 0.0) {
        if (a >= 2) {
          const auto& mv = M.field(a - 2, b).values();
          double c = eps * a * (a - 1);
          for (std::size_t i = 0; i < rv.size(); ++i) rv[i] += c * mv[i];
        }
        if (b >= 2) {
          const auto& mv = M.field(a, b - 2).values();
          double c = eps * b * (b - 1);
          for (std::size_t i = 0; i < rv.size(); ++i) rv[i] += c * mv[i];
        }
      }

      // Stretching by the velocity gradient.
      if (a > 0) {
        const auto& mv = M.field(a, b).values();
        const auto& mw = M.field(a - 1, b + 1).values();
        for (std::size_t i = 0; i < rv.size(); ++i)
          rv[i] += a * (j11[i] * mv[i] + j12[i] * mw[i]);
      }
      if (b > 0) {
        const auto& mv = M.field(a + 1, b - 1).values();
        const auto& mw = M.field(a, b).values();
        for (std::size_t i = 0; i < rv.size(); ++i)
          rv[i] += b * (j21[i] * mv[i] + j22[i] * mw[i]);
      }
      dealias_inplace(rhs);
      out.push_back(std::move(rhs));
    }
  }
  return out;
}

StressField stress_from_moments(const MomentFieldSet& M, double q) {
  const int qi = int(q);
  if (M.degree() < 2 * qi)
    throw CapacityError("stress_from_moments: table degree below 2q");
  StressField s(M.nx(), M.ny());
  auto& v11 = s.s11.mutable_values();
  auto& v12 = s.s12.mutable_values();
  auto& v22 = s.s22.mutable_values();
  for (int j = 0; j <= qi - 1; ++j) {
    double c = 2.0 * q * binomial(qi - 1, j);
    const auto& a = M.field(2 * j + 2, 2 * (qi - 1 - j)).values();
    const auto& b = M.field(2 * j + 1, 2 * (qi - 1 - j) + 1).values();
    const auto& d = M.field(2 * j, 2 * (qi - 1 - j) + 2).values();
    for (std::size_t i = 0; i < v11.size(); ++i) {
      v11[i] += c * a[i];
      v12[i] += c * b[i];
      v22[i] += c * d[i];
    }
  }
  return s;
}

void HierarchyStepper::step_inplace(MomentFieldSet& M, const VectorField2D& u,
                                    double dt) const {
  // Integrating factor on nu2, RK2 (Heun) on everything else. The rhs
  // assembly already contains nu2 Laplacian; subtract it spectrally by
  // moving to the integrating-factor frame instead.
  const int nx = M.nx(), ny = M.ny(), nyh = ny / 2 + 1;
  std::vector<double> ifac(std::size_t(nx) * nyh);
  for (int j0 = 0; j0 < nx; ++j0) {
    double k1 = wavenumber(j0, nx);
    for (int j1 = 0; j1 < nyh; ++j1)
      ifac[std::size_t(j0) * nyh + j1] =
          std::exp(-nu2_ * (k1 * k1 + double(j1) * j1) * dt);
  }
  // Work with the advection+source part only (nu2 handled by the factor):
  // rhs_total includes nu2 Laplacian, so evaluate with nu2 = 0 here.
  MomentFieldSet star(nx, ny, M.degree(), M.q(), M.closure());
  auto r1 = hierarchy_rhs(M, u, eps_, 0.0);
  for (std::size_t f = 0; f < r1.size(); ++f) {
    SpectralField2D g(nx, ny);
    auto& d = g.mutable_coeffs();
    const auto& bc = M.fields()[f].coeffs();
    const auto& sc = r1[f].coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (bc[i] + dt * sc[i]);
    star.fields()[f] = std::move(g);
  }
  auto r2 = hierarchy_rhs(star, u, eps_, 0.0);
  for (std::size_t f = 0; f < r2.size(); ++f) {
    auto& d = M.fields()[f].mutable_coeffs();
    const auto& sc1 = r1[f].coeffs();
    const auto& sc2 = r2[f].coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (d[i] + 0.5 * dt * sc1[i]) + 0.5 * dt * sc2[i];
  }
}

OldroydState OldroydState::from_kinetic(const KineticDensity& f) {
  OldroydState S(f.nx(), f.ny());
  S.sigma = kramer_stress(f, 1.0);
  S.rho = number_density(f);
  return S;
}

OldroydRhs oldroyd_rhs(const OldroydState& S, const VectorField2D& u, double eps,
                       double nu2) {
  const int nx = S.sigma.nx(), ny = S.sigma.ny();
  Jacobian jac = velocity_jacobian(u);
  OldroydRhs r{SpectralField2D(nx, ny), SpectralField2D(nx, ny),
               SpectralField2D(nx, ny), SpectralField2D(nx, ny)};
  r.s11 = transport_rhs(S.sigma.s11, u, nu2);
  r.s12 = transport_rhs(S.sigma.s12, u, nu2);
  r.s22 = transport_rhs(S.sigma.s22, u, nu2);
  r.rho = transport_rhs(S.rho, u, nu2);

  const auto& j11 = jac.j11.values();
  const auto& j12 = jac.j12.values();
  const auto& j21 = jac.j21.values();
  const auto& j22 = jac.j22.values();
  const auto& a = S.sigma.s11.values();
  const auto& b = S.sigma.s12.values();
  const auto& c = S.sigma.s22.values();
  const auto& rho = S.rho.values();

  SpectralField2D src11(nx, ny), src12(nx, ny), src22(nx, ny);
  auto& v11 = src11.mutable_values();
  auto& v12 = src12.mutable_values();
  auto& v22 = src22.mutable_values();
  const double k = kHookeanRelaxRate * eps;
  for (std::size_t i = 0; i < v11.size(); ++i) {
    v11[i] = 2.0 * (j11[i] * a[i] + j12[i] * b[i]) - k * a[i] + k * rho[i];
    v12[i] = j21[i] * a[i] + (j11[i] + j22[i]) * b[i] + j12[i] * c[i] - k * b[i];
    v22[i] = 2.0 * (j21[i] * b[i] + j22[i] * c[i]) - k * c[i] + k * rho[i];
  }
  r.s11 += src11;
  r.s12 += src12;
  r.s22 += src22;
  dealias_inplace(r.s11);
  dealias_inplace(r.s12);
  dealias_inplace(r.s22);
  dealias_inplace(r.rho);
  return r;
}

double OldroydStepper::suggest_dt(const VectorField2D& u, int nx, int ny) const {
  double umax = u.max_abs();
  if (umax == 0.0) return std::numeric_limits<double>::infinity();
  return 0.5 * (kTwoPi / std::max(nx, ny)) / umax;
}

void OldroydStepper::step_inplace(OldroydState& S, const VectorField2D& u,
                                  double dt) const {
  const int nx = S.sigma.nx(), ny = S.sigma.ny(), nyh = ny / 2 + 1;
  double umax = u.max_abs();
  if (umax > 0.0 && dt > (kTwoPi / std::max(nx, ny)) / umax)
    throw StepRejected("oldroyd_b_step: CFL violated at dt = " + std::to_string(dt));

  std::vector<double> ifac(std::size_t(nx) * nyh);
  for (int j0 = 0; j0 < nx; ++j0) {
    double k1 = wavenumber(j0, nx);
    for (int j1 = 0; j1 < nyh; ++j1)
      ifac[std::size_t(j0) * nyh + j1] =
          std::exp(-nu2_ * (k1 * k1 + double(j1) * j1) * dt);
  }

  auto fields = [](OldroydState& s) {
    return std::array<SpectralField2D*, 4>{&s.sigma.s11, &s.sigma.s12,
                                           &s.sigma.s22, &s.rho};
  };
  auto rhs_fields = [](OldroydRhs& r) {
    return std::array<SpectralField2D*, 4>{&r.s11, &r.s12, &r.s22, &r.rho};
  };

  OldroydRhs r1 = oldroyd_rhs(S, u, eps_, 0.0);
  OldroydState star(nx, ny);
  star.t = S.t;
  auto sf = fields(S), stf = fields(star);
  auto rf = rhs_fields(r1);
  for (int f = 0; f < 4; ++f) {
    auto& d = stf[f]->mutable_coeffs();
    const auto& bc = sf[f]->coeffs();
    const auto& sc = rf[f]->coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (bc[i] + dt * sc[i]);
  }
  OldroydRhs r2 = oldroyd_rhs(star, u, eps_, 0.0);
  auto rf2 = rhs_fields(r2);
  for (int f = 0; f < 4; ++f) {
    auto& d = sf[f]->mutable_coeffs();
    const auto& sc1 = rf[f]->coeffs();
    const auto& sc2 = rf2[f]->coeffs();
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = ifac[i] * (d[i] + 0.5 * dt * sc1[i]) + 0.5 * dt * sc2[i];
  }
  S.t += dt;
}

OldroydState oldroyd_b_step(const OldroydState& S, const VectorField2D& u,
                            double eps, double nu2, double dt) {
  OldroydStepper st(eps, nu2);
  OldroydState out = S;
  st.step_inplace(out, u, dt);
  return out;
}

ClosureReport closure_consistency_check(const KineticDensity& f,
                                        const MomentFieldSet& M) {
  if (f.nx() != M.nx() || f.ny() != M.ny())
    throw std::invalid_argument("closure_consistency_check: grid mismatch");
  StressField a = kramer_stress(f, M.q());
  StressField b = stress_from_moments(M, M.q());
  ClosureReport rep;
  auto [l2, linf] = StressField::difference_norms(a, b);
  rep.l2_diff = l2;
  rep.linf_diff = linf;
  double base = a.frobenius_l2();
  rep.l2_rel = base > 0.0 ? l2 / base : l2;
  return rep;
}

ClosureReport closure_consistency_check(const KineticDensity& f,
                                        const OldroydState& S, double q) {
  if (f.nx() != S.sigma.nx() || f.ny() != S.sigma.ny())
    throw std::invalid_argument("closure_consistency_check: grid mismatch");
  StressField a = kramer_stress(f, q);
  ClosureReport rep;
  auto [l2, linf] = StressField::difference_norms(a, S.sigma);
  rep.l2_diff = l2;
  rep.linf_diff = linf;
  double base = a.frobenius_l2();
  rep.l2_rel = base > 0.0 ? l2 / base : l2;
  return rep;
}

}  // namespace polykin
