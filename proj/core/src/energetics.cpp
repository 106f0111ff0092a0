#include "polykin/energetics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace polykin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double xlogx(double s) { return s > 0.0 ? s * std::log(s) : 0.0; }

std::vector<double> cell_potentials(const MGrid& g, const PotentialSpec& pot) {
  std::vector<double> u(g.cells());
  for (int i1 = 0; i1 < g.nm; ++i1)
    for (int i2 = 0; i2 < g.nm; ++i2)
      u[g.index(i1, i2)] = pot.U(std::hypot(g.center(i1), g.center(i2)));
  return u;
}

}  // namespace

const char* EnergyReport::csv_header() {
  return "t,kinetic,free_energy,rel_entropy_global,rel_entropy_local,"
         "fisher_m,fisher_x,trace_stress_l1,enstrophy";
}

std::string EnergyReport::csv_row() const {
  char buf[352];
  std::snprintf(buf, sizeof buf,
                "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", t,
                kinetic, free_energy, rel_entropy_global, rel_entropy_local,
                fisher_m, fisher_x, trace_stress_l1, enstrophy);
  return buf;
}

double free_energy_slice(const DensitySlice& s, const PotentialSpec& pot) {
  const MGrid& g = s.grid;
  double sum = 0.0;
  for (int i1 = 0; i1 < g.nm; ++i1) {
    for (int i2 = 0; i2 < g.nm; ++i2) {
      double f = s.f[g.index(i1, i2)];
      if (f <= 0.0) continue;
      double u = pot.U(std::hypot(g.center(i1), g.center(i2)));
      sum += f * (std::log(f) + u);
    }
  }
  return sum * g.cell_measure();
}

double free_energy(const KineticDensity& f, const PotentialSpec& pot) {
  const MGrid& g = f.mgrid();
  const std::size_t xp = f.xpoints(), cells = g.cells();
  std::vector<double> uvals = cell_potentials(g, pot);
  std::vector<double> partial(cells);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < std::ptrdiff_t(cells); ++m) {
    const double* s = f.data() + std::size_t(m) * xp;
    const double u = uvals[m];
    double acc = 0.0;
    for (std::size_t c = 0; c < xp; ++c) {
      double v = s[c];
      if (v > 0.0) acc += v * (std::log(v) + u);
    }
    partial[m] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total * f.dx() * f.dx() * g.cell_measure();
}

namespace {

/// Shared pieces of the entropy family: the free energy integral, the total
/// mass, and the marginal sum int M00 log M00 dx. The relative entropies
/// follow algebraically (discretely exact identities):
///   rel_global = E + log(Z |T| / mass) mass      (mass-matched reference)
///   rel_local  = E + log(Z) mass - int M00 log M00.
struct EntropyParts {
  double free_energy = 0.0;
  double mass = 0.0;
  double marginal_xlogx = 0.0;  ///< int M00 log M00 dx
};

EntropyParts entropy_parts(const KineticDensity& f, const PotentialSpec& pot) {
  EntropyParts p;
  p.free_energy = free_energy(f, pot);
  SpectralField2D rho = number_density(f);
  const double dxw = f.dx() * f.dx();
  double mass = 0.0, marg = 0.0;
  for (double v : rho.values()) {
    mass += v;
    marg += xlogx(v);
  }
  p.mass = mass * dxw;
  p.marginal_xlogx = marg * dxw;
  return p;
}

}  // namespace

double rel_entropy_global(const KineticDensity& f, const PotentialSpec& pot) {
  EntropyParts p = entropy_parts(f, pot);
  const double z = equilibrium_partition(pot.q) * kTwoPi * kTwoPi;
  if (p.mass <= 0.0) return 0.0;
  return p.free_energy + std::log(z / p.mass) * p.mass;
}

double rel_entropy_local(const KineticDensity& f, const PotentialSpec& pot) {
  EntropyParts p = entropy_parts(f, pot);
  const double z = equilibrium_partition(pot.q);
  return p.free_energy + std::log(z) * p.mass - p.marginal_xlogx;
}

FisherPair fisher_dissipation(const KineticDensity& f, const PotentialSpec& pot,
                              double eps, double nu2) {
  FisherPair out;
  const MGrid& g = f.mgrid();
  const double h = g.h();
  const std::size_t xp = f.xpoints(), cells = g.cells();
  std::vector<double> uvals = cell_potentials(g, pot);

  // log f cached once; empty cells keep 0 and are skipped via f itself.
  std::vector<double> logf(f.size());
  const double* fd = f.data();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < std::ptrdiff_t(f.size()); ++i)
    logf[i] = fd[i] > 0.0 ? std::log(fd[i]) : 0.0;

  // Configuration part via face differences of log f + U: the discrete
  // analogue of f |grad_m(log f + U)|^2 that vanishes identically on
  // e^{-U}-proportional data.
  auto face_sum = [&](std::size_t mi, std::size_t mj) {
    const double* fa = fd + mi * xp;
    const double* fb = fd + mj * xp;
    const double* la = logf.data() + mi * xp;
    const double* lb = logf.data() + mj * xp;
    const double du = uvals[mj] - uvals[mi];
    double acc = 0.0;
    for (std::size_t c = 0; c < xp; ++c) {
      if (fa[c] <= 0.0 || fb[c] <= 0.0) continue;
      double s = (lb[c] - la[c] + du) / h;
      acc += 0.5 * (fa[c] + fb[c]) * s * s;
    }
    return acc;
  };
  std::vector<double> pf1(cells, 0.0);
#pragma omp parallel for schedule(static)
  for (int i1 = 0; i1 < g.nm; ++i1)
    for (int i2 = 0; i2 < g.nm; ++i2) {
      double acc = 0.0;
      if (i1 + 1 < g.nm) acc += face_sum(g.index(i1, i2), g.index(i1 + 1, i2));
      if (i2 + 1 < g.nm) acc += face_sum(g.index(i1, i2), g.index(i1, i2 + 1));
      pf1[g.index(i1, i2)] = acc;
    }
  double fm_total = 0.0;
  for (double p : pf1) fm_total += p;
  out.fisher_m = eps * fm_total * f.dx() * f.dx() * g.cell_measure();

  // Transport part |grad_x f|^2 / f with centered differences on the
  // periodic x-grid, per configuration cell.
  const int nx = f.nx(), ny = f.ny();
  const double dxs = f.dx();
  std::vector<double> pf2(cells, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < std::ptrdiff_t(cells); ++m) {
    const double* s = fd + std::size_t(m) * xp;
    double acc = 0.0;
    for (int ix = 0; ix < nx; ++ix) {
      const int xm = (ix + nx - 1) % nx, xpp = (ix + 1) % nx;
      for (int iy = 0; iy < ny; ++iy) {
        double fv = s[std::size_t(ix) * ny + iy];
        if (fv <= 0.0) continue;
        double g1 = (s[std::size_t(xpp) * ny + iy] - s[std::size_t(xm) * ny + iy]) /
                    (2.0 * dxs);
        double g2 = (s[std::size_t(ix) * ny + (iy + 1) % ny] -
                     s[std::size_t(ix) * ny + (iy + ny - 1) % ny]) /
                    (2.0 * dxs);
        acc += (g1 * g1 + g2 * g2) / fv;
      }
    }
    pf2[m] = acc;
  }
  double fx_total = 0.0;
  for (double p : pf2) fx_total += p;
  out.fisher_x = nu2 * fx_total * dxs * dxs * g.cell_measure();
  return out;
}

double l1_distance(const KineticDensity& f, const KineticDensity& g) {
  if (f.size() != g.size())
    throw std::invalid_argument("l1_distance: size mismatch");
  double s = 0.0;
  const double* a = f.data();
  const double* b = g.data();
  for (std::size_t i = 0; i < f.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * f.dx() * f.dx() * f.mgrid().cell_measure();
}

double l1_distance_to_local(const KineticDensity& f,
                            const std::vector<double>& slice) {
  const std::size_t cells = f.mgrid().cells(), xp = f.xpoints();
  if (slice.size() != cells)
    throw std::invalid_argument("l1_distance_to_local: slice size mismatch");
  SpectralField2D rho = number_density(f);
  const auto& m00 = rho.values();
  double s = 0.0;
  for (std::size_t m = 0; m < cells; ++m) {
    const double* b = f.data() + m * xp;
    const double eq = slice[m];
    for (std::size_t c = 0; c < xp; ++c) s += std::abs(b[c] - m00[c] * eq);
  }
  return s * f.dx() * f.dx() * f.mgrid().cell_measure();
}

EnergyReport energy_report(const FlowState& flow, const KineticDensity& f,
                           const PotentialSpec& pot, double eps, double nu2,
                           double q) {
  EnergyReport r;
  r.t = flow.time();
  r.kinetic = kinetic_energy(flow);

  EntropyParts p = entropy_parts(f, pot);
  const double z = equilibrium_partition(pot.q);
  r.free_energy = p.free_energy;
  r.rel_entropy_global =
      p.mass > 0.0
          ? p.free_energy + std::log(z * kTwoPi * kTwoPi / p.mass) * p.mass
          : 0.0;
  r.rel_entropy_local = p.free_energy + std::log(z) * p.mass - p.marginal_xlogx;

  FisherPair fp = fisher_dissipation(f, pot, eps, nu2);
  r.fisher_m = fp.fisher_m;
  r.fisher_x = fp.fisher_x;
  r.trace_stress_l1 = kramer_stress(f, q).trace_l1();
  r.enstrophy = 0.5 * velocity_gradient_l2sq(flow);
  return r;
}

namespace {

MonotonicityResult check_monotone(const std::vector<double>& series, double tol) {
  MonotonicityResult res;
  int consecutive = 0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    double inc = series[i] - series[i - 1];
    if (inc > res.worst_increment) {
      res.worst_increment = inc;
      res.worst_index = int(i);
    }
    if (inc > tol) {
      ++consecutive;
      res.max_consecutive_violations =
          std::max(res.max_consecutive_violations, consecutive);
    } else {
      consecutive = 0;
    }
  }
  return res;
}

}  // namespace

MonotonicityResult coupled_energy_check(const std::vector<EnergyReport>& hist,
                                        double K, double tol_per_step) {
  std::vector<double> series;
  series.reserve(hist.size());
  for (const auto& r : hist) series.push_back(r.kinetic + K * r.free_energy);
  MonotonicityResult res = check_monotone(series, tol_per_step);
  res.passed = res.worst_increment <= tol_per_step;
  return res;
}

MonotonicityResult free_energy_estimate_check(
    const std::vector<EnergyReport>& hist, double K, double tol) {
  std::vector<double> series;
  series.reserve(hist.size());
  for (const auto& r : hist)
    series.push_back(r.rel_entropy_local + 2.0 * r.kinetic / K);
  MonotonicityResult res = check_monotone(series, tol);
  res.passed = res.worst_increment <= tol && res.max_consecutive_violations < 3;
  return res;
}

TraceBoundResult trace_stress_bound(const std::vector<EnergyReport>& hist,
                                    double K, double q, double eps, double nu1,
                                    double mass_l1, double worst_shear_defect) {
  TraceBoundResult res;
  res.shear_trace_defect = worst_shear_defect;
  if (hist.empty()) return res;
  const double C = K / (2.0 * q * (2.0 * q - 1.0));
  const double A =
      2.0 * q * (2.0 * q - 1.0) * (2.0 * q) * (2.0 * q) * eps * std::max(1.0, C);
  const double initial = hist.front().kinetic + C * hist.front().trace_stress_l1;
  double grad_integral = 0.0;
  res.worst_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (i > 0) {
      double dt = hist[i].t - hist[i - 1].t;
      // enstrophy = (1/2) int omega^2 and int |grad u|^2 = int omega^2, so
      // this trapezoid already carries the factor 2.
      grad_integral += dt * (hist[i].enstrophy + hist[i - 1].enstrophy);
    }
    double lhs = hist[i].kinetic + C * hist[i].trace_stress_l1 + nu1 * grad_integral;
    double rhs = A * mass_l1 * (hist[i].t - hist.front().t) + initial;
    res.worst_margin = std::max(res.worst_margin, lhs - rhs);
  }
  res.passed = res.worst_margin <= 1e-9 && worst_shear_defect <= 1e-12;
  return res;
}

CkpResult ckp_check(const std::vector<double>& f, const std::vector<double>& g,
                    const MGrid& grid) {
  if (f.size() != grid.cells() || g.size() != grid.cells())
    throw std::invalid_argument("ckp_check: size mismatch");
  const double w = grid.cell_measure();
  double mf = 0.0, mg = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (g[i] <= 0.0)
      throw std::domain_error("ckp_check: reference density must be positive");
    mf += f[i];
    mg += g[i];
  }
  mf *= w;
  mg *= w;
  CkpResult res;
  double kl = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double fv = f[i] / mf, gv = g[i] / mg;
    kl += xlogx(fv) - fv * std::log(gv) - fv + gv;
    l1 += std::abs(fv - gv);
  }
  res.kl = kl * w;
  res.l1 = l1 * w;
  res.passed = res.kl >= 0.5 * res.l1 * res.l1 - 1e-12;
  return res;
}

}  // namespace polykin
