#include "polykin/kinetic.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace polykin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Bernoulli function z / (e^z - 1), stable near zero.
double bernoulli(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z + z * z / 12.0;
  return z / std::expm1(z);
}

inline double van_leer(double a, double b) {
  double ab = a * b;
  return ab > 0.0 ? 2.0 * ab / (a + b) : 0.0;
}

constexpr std::size_t kBatch = 32;

/// Per-thread aligned buffers for the batched transport transforms.
struct XBatchScratch {
  double* fbuf = nullptr;   // batch copy of f slabs
  double* pbuf = nullptr;   // product staging
  double* sbuf = nullptr;   // predictor stage in physical space
  std::complex<double>* fh = nullptr;
  std::complex<double>* ph = nullptr;
  std::complex<double>* nh = nullptr;
  std::complex<double>* nh2 = nullptr;
  std::size_t rn = 0, sn = 0;

  void ensure(std::size_t rn_need, std::size_t sn_need) {
    if (rn_need > rn) {
      fftw_free(fbuf);
      fftw_free(pbuf);
      fftw_free(sbuf);
      fbuf = fftw_alloc_real(rn_need);
      pbuf = fftw_alloc_real(rn_need);
      sbuf = fftw_alloc_real(rn_need);
      rn = rn_need;
    }
    if (sn_need > sn) {
      fftw_free(fh);
      fftw_free(ph);
      fftw_free(nh);
      fftw_free(nh2);
      fh = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(sn_need));
      ph = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(sn_need));
      nh = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(sn_need));
      nh2 = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(sn_need));
      sn = sn_need;
    }
  }
  ~XBatchScratch() {
    fftw_free(fbuf);
    fftw_free(pbuf);
    fftw_free(sbuf);
    fftw_free(fh);
    fftw_free(ph);
    fftw_free(nh);
    fftw_free(nh2);
  }
};

XBatchScratch& batch_scratch(std::size_t rn, std::size_t sn) {
  thread_local XBatchScratch sc;
  sc.ensure(rn, sn);
  return sc;
}

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_plan make_many_r2c(int nx, int ny, int howmany) {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  const int n[2] = {nx, ny};
  const int nxy = nx * ny, ns = nx * (ny / 2 + 1);
  double* in = fftw_alloc_real(std::size_t(howmany) * nxy);
  fftw_complex* out = fftw_alloc_complex(std::size_t(howmany) * ns);
  fftw_plan p = fftw_plan_many_dft_r2c(2, n, howmany, in, nullptr, 1, nxy, out,
                                       nullptr, 1, ns, FFTW_MEASURE);
  fftw_free(in);
  fftw_free(out);
  return p;
}

fftw_plan make_many_c2r(int nx, int ny, int howmany) {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  const int n[2] = {nx, ny};
  const int nxy = nx * ny, ns = nx * (ny / 2 + 1);
  fftw_complex* in = fftw_alloc_complex(std::size_t(howmany) * ns);
  double* out = fftw_alloc_real(std::size_t(howmany) * nxy);
  fftw_plan p = fftw_plan_many_dft_c2r(2, n, howmany, in, nullptr, 1, ns, out,
                                       nullptr, 1, nxy, FFTW_MEASURE);
  fftw_free(in);
  fftw_free(out);
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// KineticDensity
// ---------------------------------------------------------------------------

KineticDensity::KineticDensity(int nx, int ny, MGrid mgrid)
    : nx_(nx), ny_(ny), mgrid_(mgrid),
      data_(std::size_t(nx) * ny * mgrid.cells(), 0.0) {
  if (nx < 2 || ny < 2 || mgrid.nm < 4)
    throw std::invalid_argument("KineticDensity: grid too small");
}

double KineticDensity::dx() const { return kTwoPi / nx_; }

std::vector<double> KineticDensity::column(int ix, int iy) const {
  std::vector<double> out(mgrid_.cells());
  const std::size_t xp = xpoints(), c = xindex(ix, iy);
  for (std::size_t m = 0; m < out.size(); ++m) out[m] = data_[m * xp + c];
  return out;
}

void KineticDensity::set_column(int ix, int iy, const std::vector<double>& block) {
  if (block.size() != mgrid_.cells())
    throw std::invalid_argument("set_column: block size mismatch");
  const std::size_t xp = xpoints(), c = xindex(ix, iy);
  for (std::size_t m = 0; m < block.size(); ++m) data_[m * xp + c] = block[m];
}

double KineticDensity::mass() const {
  const std::size_t xp = xpoints(), cells = mgrid_.cells();
  std::vector<double> partial(cells);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < std::ptrdiff_t(cells); ++m) {
    const double* s = data_.data() + std::size_t(m) * xp;
    double acc = 0.0;
    for (std::size_t c = 0; c < xp; ++c) acc += s[c];
    partial[m] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total * dx() * dx() * mgrid_.cell_measure();
}

double KineticDensity::min_value() const {
  double m = data_.empty() ? 0.0 : data_[0];
  for (double v : data_) m = std::min(m, v);
  return m;
}

double KineticDensity::max_value() const {
  double m = data_.empty() ? 0.0 : data_[0];
  for (double v : data_) m = std::max(m, v);
  return m;
}

KineticDensity KineticDensity::product(
    int nx, int ny, MGrid mgrid, const std::function<double(double, double)>& cx,
    const std::function<double(double, double)>& fm) {
  KineticDensity out(nx, ny, mgrid);
  std::vector<double> xw(out.xpoints());
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      xw[out.xindex(ix, iy)] = cx(kTwoPi * ix / nx, kTwoPi * iy / ny);
  for (int i1 = 0; i1 < mgrid.nm; ++i1)
    for (int i2 = 0; i2 < mgrid.nm; ++i2) {
      double v = fm(mgrid.center(i1), mgrid.center(i2));
      double* s = out.slab(i1, i2);
      for (std::size_t c = 0; c < xw.size(); ++c) s[c] = v * xw[c];
    }
  return out;
}

void KineticDensity::normalize(double target) {
  double m = mass();
  if (m <= 0.0) throw std::runtime_error("KineticDensity::normalize: nonpositive mass");
  double s = target / m;
  for (double& v : data_) v *= s;
}

// ---------------------------------------------------------------------------
// Equilibrium and stress
// ---------------------------------------------------------------------------

EquilibriumSlice equilibrium_density(const PotentialSpec& pot, const MGrid& g) {
  // Radial bound for the continuum mass outside the box.
  double tail = 0.0;
  {
    const int n = 512;
    double r1 = g.lm, r2 = 3.0 * g.lm + 10.0;
    double h = (r2 - r1) / n;
    for (int i = 0; i < n; ++i) {
      double r = r1 + (i + 0.5) * h;
      tail += kTwoPi * r * std::exp(-pot.U(r)) * h;
    }
  }
  double z_cont = equilibrium_partition(pot.q);
  if (tail / z_cont > 1e-10)
    throw NormalizationLossError(
        "equilibrium_density: configuration box too small, relative mass loss " +
        std::to_string(tail / z_cont));

  EquilibriumSlice out;
  out.grid = g;
  out.f.resize(g.cells());
  double sum = 0.0;
  for (int i1 = 0; i1 < g.nm; ++i1)
    for (int i2 = 0; i2 < g.nm; ++i2) {
      double v = std::exp(-pot.U(std::hypot(g.center(i1), g.center(i2))));
      out.f[g.index(i1, i2)] = v;
      sum += v;
    }
  out.discrete_z = sum * g.cell_measure();
  for (double& v : out.f) v /= out.discrete_z;
  return out;
}

StressField kramer_stress(const KineticDensity& f, double q) {
  StressField s(f.nx(), f.ny());
  auto& v11 = s.s11.mutable_values();
  auto& v12 = s.s12.mutable_values();
  auto& v22 = s.s22.mutable_values();
  const MGrid& g = f.mgrid();
  const std::size_t xp = f.xpoints();
  const double w = g.cell_measure();
#pragma omp parallel
  {
#ifdef _OPENMP
    const int nt = omp_get_num_threads();
    const int tid = omp_get_thread_num();
#else
    const int nt = 1, tid = 0;
#endif
    const std::size_t lo = xp * tid / nt, hi = xp * (tid + 1) / nt;
    for (int i1 = 0; i1 < g.nm; ++i1) {
      double m1 = g.center(i1);
      for (int i2 = 0; i2 < g.nm; ++i2) {
        double m2 = g.center(i2);
        double r2 = m1 * m1 + m2 * m2;
        double wgt = 2.0 * q * std::pow(r2, q - 1.0) * w;
        double w11 = wgt * m1 * m1, w12 = wgt * m1 * m2, w22 = wgt * m2 * m2;
        const double* sl = f.slab(i1, i2);
        for (std::size_t c = lo; c < hi; ++c) {
          double fv = sl[c];
          v11[c] += w11 * fv;
          v12[c] += w12 * fv;
          v22[c] += w22 * fv;
        }
      }
    }
  }
  for (double v : v11)
    if (!std::isfinite(v))
      throw std::runtime_error("kramer_stress: non-finite density value");
  return s;
}

SpectralField2D number_density(const KineticDensity& f) {
  SpectralField2D rho(f.nx(), f.ny());
  auto& v = rho.mutable_values();
  const std::size_t xp = f.xpoints();
  for (std::size_t m = 0; m < f.mgrid().cells(); ++m) {
    const double* s = f.slab(m);
    for (std::size_t c = 0; c < xp; ++c) v[c] += s[c];
  }
  const double w = f.mgrid().cell_measure();
  for (double& x : v) x *= w;
  return rho;
}

MomentTable moments_at(const KineticDensity& f, int ix, int iy, int degree) {
  std::vector<double> block = f.column(ix, iy);
  return MomentTable::from_slice({block.data(), f.mgrid()}, degree);
}

std::vector<double> mbar_l2_norms(const KineticDensity& f, int degree) {
  const MGrid& g = f.mgrid();
  const std::size_t xp = f.xpoints();
  std::vector<std::vector<double>> mb(degree + 1, std::vector<double>(xp, 0.0));
  for (int i1 = 0; i1 < g.nm; ++i1)
    for (int i2 = 0; i2 < g.nm; ++i2) {
      double r = std::hypot(g.center(i1), g.center(i2));
      const double* s = f.slab(i1, i2);
      double rk = 1.0;
      for (int k = 0; k <= degree; ++k) {
        auto& acc = mb[k];
        for (std::size_t c = 0; c < xp; ++c) acc[c] += rk * std::abs(s[c]);
        rk *= r;
      }
    }
  std::vector<double> out(degree + 1);
  const double cw = g.cell_measure(), dxw = f.dx() * f.dx();
  for (int k = 0; k <= degree; ++k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < xp; ++c) sum += mb[k][c] * mb[k][c];
    out[k] = std::sqrt(sum * cw * cw * dxw);
  }
  return out;
}

std::vector<SpectralField2D> extract_moment_fields(const KineticDensity& f,
                                                   int degree) {
  const int count = (degree + 1) * (degree + 2) / 2;
  std::vector<SpectralField2D> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) out.emplace_back(f.nx(), f.ny());
  std::vector<std::vector<double>*> vals(count);
  for (int i = 0; i < count; ++i) vals[i] = &out[i].mutable_values();

  const MGrid& g = f.mgrid();
  const std::size_t xp = f.xpoints();
  const double w = g.cell_measure();
  std::vector<double> p1(degree + 1), p2(degree + 1);
  for (int i1 = 0; i1 < g.nm; ++i1) {
    for (int i2 = 0; i2 < g.nm; ++i2) {
      double m1 = g.center(i1), m2 = g.center(i2);
      p1[0] = p2[0] = 1.0;
      for (int k = 1; k <= degree; ++k) {
        p1[k] = p1[k - 1] * m1;
        p2[k] = p2[k - 1] * m2;
      }
      const double* s = f.slab(i1, i2);
      int idx = 0;
      for (int d = 0; d <= degree; ++d)
        for (int b = 0; b <= d; ++b) {
          double coeff = w * p1[d - b] * p2[b];
          auto& dst = *vals[idx++];
          for (std::size_t c = 0; c < xp; ++c) dst[c] += coeff * s[c];
        }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// FokkerPlanckStepper
// ---------------------------------------------------------------------------

FokkerPlanckStepper::FokkerPlanckStepper(int nx, int ny, MGrid mgrid,
                                         PotentialSpec pot, CutoffProfile cut,
                                         double eps, double nu2)
    : nx_(nx), ny_(ny), mg_(mgrid), pot_(pot), cut_(cut), eps_(eps), nu2_(nu2) {
  const int nm = mg_.nm;
  const double h = mg_.h();
  TruncatedPotential tp(pot_, cut_, std::sqrt(2.0) * mg_.lm + h);

  psi_.resize(mg_.cells());
  utilde_.resize(mg_.cells());
  for (int i1 = 0; i1 < nm; ++i1)
    for (int i2 = 0; i2 < nm; ++i2) {
      double r = std::hypot(mg_.center(i1), mg_.center(i2));
      psi_[mg_.index(i1, i2)] = cut_.psi(r);
      utilde_[mg_.index(i1, i2)] = tp.value(r);
    }

  const double sg = eps_ / h;
  sgp1_.resize(std::size_t(nm - 1) * nm);
  sgm1_.resize(std::size_t(nm - 1) * nm);
  fm1a_.resize(std::size_t(nm - 1) * nm);
  fm1b_.resize(std::size_t(nm - 1) * nm);
  for (int i1 = 0; i1 + 1 < nm; ++i1)
    for (int i2 = 0; i2 < nm; ++i2) {
      std::size_t fi = std::size_t(i1) * nm + i2;
      double d = utilde_[mg_.index(i1 + 1, i2)] - utilde_[mg_.index(i1, i2)];
      sgp1_[fi] = sg * bernoulli(d);
      sgm1_[fi] = sg * bernoulli(-d);
      double m1f = mg_.center(i1) + 0.5 * h;
      double m2c = mg_.center(i2);
      double pf = cut_.psi(std::hypot(m1f, m2c));
      fm1a_[fi] = pf * m1f;
      fm1b_[fi] = pf * m2c;
    }

  sgp2_.resize(std::size_t(nm) * (nm - 1));
  sgm2_.resize(std::size_t(nm) * (nm - 1));
  fm2a_.resize(std::size_t(nm) * (nm - 1));
  fm2b_.resize(std::size_t(nm) * (nm - 1));
  for (int i1 = 0; i1 < nm; ++i1)
    for (int i2 = 0; i2 + 1 < nm; ++i2) {
      std::size_t fi = std::size_t(i1) * (nm - 1) + i2;
      double d = utilde_[mg_.index(i1, i2 + 1)] - utilde_[mg_.index(i1, i2)];
      sgp2_[fi] = sg * bernoulli(d);
      sgm2_[fi] = sg * bernoulli(-d);
      double m1c = mg_.center(i1);
      double m2f = mg_.center(i2) + 0.5 * h;
      double pf = cut_.psi(std::hypot(m1c, m2f));
      fm2a_[fi] = pf * m1c;
      fm2b_[fi] = pf * m2f;
    }

  // Worst per-cell outflow rate of the exponential-fitting part.
  double worst = 0.0;
  for (int i1 = 0; i1 < nm; ++i1)
    for (int i2 = 0; i2 < nm; ++i2) {
      double rate = 0.0;
      if (i1 + 1 < nm) rate += sgp1_[std::size_t(i1) * nm + i2];
      if (i1 > 0) rate += sgm1_[std::size_t(i1 - 1) * nm + i2];
      if (i2 + 1 < nm) rate += sgp2_[std::size_t(i1) * (nm - 1) + i2];
      if (i2 > 0) rate += sgm2_[std::size_t(i1) * (nm - 1) + i2 - 1];
      worst = std::max(worst, rate);
    }
  sg_rate_bound_ = worst / h;

  const std::size_t rem = mg_.cells() % kBatch;
  plan_fwd_ = make_many_r2c(nx_, ny_, int(kBatch));
  plan_inv_ = make_many_c2r(nx_, ny_, int(kBatch));
  if (rem > 0) {
    plan_fwd_rem_ = make_many_r2c(nx_, ny_, int(rem));
    plan_inv_rem_ = make_many_c2r(nx_, ny_, int(rem));
  }
}

FokkerPlanckStepper::~FokkerPlanckStepper() {
  std::lock_guard<std::mutex> lock(fftw_planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  if (plan_fwd_rem_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_rem_));
  if (plan_inv_rem_) fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_rem_));
}

void FokkerPlanckStepper::exec_forward(std::size_t count, double* in,
                                       std::complex<double>* out) const {
  fftw_plan p = static_cast<fftw_plan>(count == kBatch ? plan_fwd_ : plan_fwd_rem_);
  fftw_execute_dft_r2c(p, in, reinterpret_cast<fftw_complex*>(out));
}

void FokkerPlanckStepper::exec_inverse(std::size_t count, std::complex<double>* in,
                                       double* out) const {
  fftw_plan p = static_cast<fftw_plan>(count == kBatch ? plan_inv_ : plan_inv_rem_);
  fftw_execute_dft_c2r(p, reinterpret_cast<fftw_complex*>(in), out);
}

std::vector<double> FokkerPlanckStepper::truncated_equilibrium_slice() const {
  std::vector<double> f(mg_.cells());
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = std::exp(-utilde_[i]);
    sum += f[i];
  }
  double z = sum * mg_.cell_measure();
  for (double& v : f) v /= z;
  return f;
}

void FokkerPlanckStepper::m_substep(KineticDensity& f, double dt,
                                    const std::vector<double>& j11,
                                    const std::vector<double>& j12,
                                    const std::vector<double>& j21,
                                    const std::vector<double>& j22,
                                    bool axis1_first) {
  const int nm = mg_.nm;
  const double cdt = dt / mg_.h();
  const std::size_t xp = f.xpoints();

  // Fused conservative sweep along one configuration axis: march through
  // the slab rows keeping the upstream face flux; each half-step applies
  // the two axes in alternating order so the full Strang step stays
  // symmetric. Both sweeps preserve e^{-Utilde} exactly and conserve mass
  // by construction (telescoping fluxes, zero-flux walls).
  auto sweep_axis1 = [&]() {
#pragma omp parallel
    {
      std::vector<double> flux_prev(xp), flux_next(xp), old_prev(xp), old_cur(xp);
#pragma omp for schedule(static)
      for (int i2 = 0; i2 < nm; ++i2) {
        std::fill(flux_prev.begin(), flux_prev.end(), 0.0);
        std::fill(old_prev.begin(), old_prev.end(), 0.0);
        for (int i1 = 0; i1 < nm; ++i1) {
          double* fc = f.slab(i1, i2);
          std::copy(fc, fc + xp, old_cur.begin());
          if (i1 + 1 < nm) {
            std::size_t fi = std::size_t(i1) * nm + i2;
            const double sp = sgp1_[fi], sm = sgm1_[fi];
            const double wa = fm1a_[fi], wb = fm1b_[fi];
            const double* fr = f.slab(i1 + 1, i2);
            const double* frr = i1 + 2 < nm ? f.slab(i1 + 2, i2) : nullptr;
            const double* fll = i1 > 0 ? old_prev.data() : nullptr;
            for (std::size_t c = 0; c < xp; ++c) {
              double flux = sp * old_cur[c] - sm * fr[c];
              double w = j11[c] * wa + j12[c] * wb;
              if (w > 0.0) {
                double sl = fll ? van_leer(old_cur[c] - fll[c], fr[c] - old_cur[c]) : 0.0;
                flux += w * (old_cur[c] + 0.5 * sl);
              } else if (w < 0.0) {
                double sl = frr ? van_leer(fr[c] - old_cur[c], frr[c] - fr[c]) : 0.0;
                flux += w * (fr[c] - 0.5 * sl);
              }
              flux_next[c] = flux;
            }
          } else {
            std::fill(flux_next.begin(), flux_next.end(), 0.0);
          }
          for (std::size_t c = 0; c < xp; ++c)
            fc[c] += cdt * (flux_prev[c] - flux_next[c]);
          std::swap(flux_prev, flux_next);
          std::swap(old_prev, old_cur);
        }
      }
    }
  };

  auto sweep_axis2 = [&]() {
#pragma omp parallel
    {
      std::vector<double> flux_prev(xp), flux_next(xp), old_prev(xp), old_cur(xp);
#pragma omp for schedule(static)
      for (int i1 = 0; i1 < nm; ++i1) {
        std::fill(flux_prev.begin(), flux_prev.end(), 0.0);
        std::fill(old_prev.begin(), old_prev.end(), 0.0);
        for (int i2 = 0; i2 < nm; ++i2) {
          double* fc = f.slab(i1, i2);
          std::copy(fc, fc + xp, old_cur.begin());
          if (i2 + 1 < nm) {
            std::size_t fi = std::size_t(i1) * (nm - 1) + i2;
            const double sp = sgp2_[fi], sm = sgm2_[fi];
            const double wa = fm2a_[fi], wb = fm2b_[fi];
            const double* fr = f.slab(i1, i2 + 1);
            const double* frr = i2 + 2 < nm ? f.slab(i1, i2 + 2) : nullptr;
            const double* fll = i2 > 0 ? old_prev.data() : nullptr;
            for (std::size_t c = 0; c < xp; ++c) {
              double flux = sp * old_cur[c] - sm * fr[c];
              double w = j21[c] * wa + j22[c] * wb;
              if (w > 0.0) {
                double sl = fll ? van_leer(old_cur[c] - fll[c], fr[c] - old_cur[c]) : 0.0;
                flux += w * (old_cur[c] + 0.5 * sl);
              } else if (w < 0.0) {
                double sl = frr ? van_leer(fr[c] - old_cur[c], frr[c] - fr[c]) : 0.0;
                flux += w * (fr[c] - 0.5 * sl);
              }
              flux_next[c] = flux;
            }
          } else {
            std::fill(flux_next.begin(), flux_next.end(), 0.0);
          }
          for (std::size_t c = 0; c < xp; ++c)
            fc[c] += cdt * (flux_prev[c] - flux_next[c]);
          std::swap(flux_prev, flux_next);
          std::swap(old_prev, old_cur);
        }
      }
    }
  };

  if (axis1_first) {
    sweep_axis1();
    sweep_axis2();
  } else {
    sweep_axis2();
    sweep_axis1();
  }
}

void FokkerPlanckStepper::x_substep(KineticDensity& f, const VectorField2D& u,
                                    double dt) {
  const int nx = nx_, ny = ny_, nyh = ny / 2 + 1;
  const std::size_t nxy = std::size_t(nx) * ny, ns = std::size_t(nx) * nyh;
  const std::size_t cells = mg_.cells();

  if (dt != cached_dt_) {
    ifac_.resize(ns);
    for (int j0 = 0; j0 < nx; ++j0) {
      double k1 = wavenumber(j0, nx);
      for (int j1 = 0; j1 < nyh; ++j1) {
        double k2 = j1;
        ifac_[std::size_t(j0) * nyh + j1] = std::exp(-nu2_ * (k1 * k1 + k2 * k2) * dt);
      }
    }
    cached_dt_ = dt;
  }

  // Wavenumber tables and the dealias mask (Nyquist rows removed by the
  // 2/3 rule automatically).
  std::vector<double> kx(ns), ky(ns);
  std::vector<unsigned char> keep(ns);
  {
    const int kmax1 = nx / 3, kmax2 = ny / 3;
    for (int j0 = 0; j0 < nx; ++j0) {
      int k1 = wavenumber(j0, nx);
      for (int j1 = 0; j1 < nyh; ++j1) {
        std::size_t i = std::size_t(j0) * nyh + j1;
        kx[i] = j0 == nx / 2 ? 0.0 : double(k1);
        ky[i] = j1 == ny / 2 ? 0.0 : double(j1);
        keep[i] = std::abs(k1) <= kmax1 && j1 <= kmax2;
      }
    }
  }

  const auto& u1v = u.u1.values();
  const auto& u2v = u.u2.values();
  const double inv_n = 1.0 / double(nxy);
  const std::size_t nbatch = (cells + kBatch - 1) / kBatch;

#pragma omp parallel
  {
    XBatchScratch& sc = batch_scratch(kBatch * nxy, kBatch * ns);

    // Nonlinear term -div(u field) for a batch; spectra stay unnormalized
    // until the combine steps fold in 1/N.
    auto nonlinear = [&](const double* fields, std::size_t count,
                         std::complex<double>* out) {
      for (std::size_t b = 0; b < count; ++b) {
        const double* src = fields + b * nxy;
        double* dst = sc.pbuf + b * nxy;
        for (std::size_t i = 0; i < nxy; ++i) dst[i] = u1v[i] * src[i];
      }
      exec_forward(count, sc.pbuf, sc.ph);
      for (std::size_t b = 0; b < count; ++b) {
        const auto* ph = sc.ph + b * ns;
        auto* o = out + b * ns;
        for (std::size_t i = 0; i < ns; ++i)
          o[i] = std::complex<double>(0.0, -kx[i]) * ph[i];
      }
      for (std::size_t b = 0; b < count; ++b) {
        const double* src = fields + b * nxy;
        double* dst = sc.pbuf + b * nxy;
        for (std::size_t i = 0; i < nxy; ++i) dst[i] = u2v[i] * src[i];
      }
      exec_forward(count, sc.pbuf, sc.ph);
      for (std::size_t b = 0; b < count; ++b) {
        const auto* ph = sc.ph + b * ns;
        auto* o = out + b * ns;
        for (std::size_t i = 0; i < ns; ++i) {
          o[i] += std::complex<double>(0.0, -ky[i]) * ph[i];
          if (!keep[i]) o[i] = 0.0;
        }
      }
    };

#pragma omp for schedule(static)
    for (std::ptrdiff_t batch = 0; batch < std::ptrdiff_t(nbatch); ++batch) {
      const std::size_t m0 = std::size_t(batch) * kBatch;
      const std::size_t count = std::min<std::size_t>(kBatch, cells - m0);

      double* fb = sc.fbuf;
      std::memcpy(fb, f.slab(m0), count * nxy * sizeof(double));
      nonlinear(fb, count, sc.nh);
      exec_forward(count, fb, sc.fh);  // destroys fb, no longer needed
      // Predictor in the integrating-factor frame (1/N folded in here).
      for (std::size_t b = 0; b < count; ++b) {
        const auto* fh = sc.fh + b * ns;
        const auto* nh = sc.nh + b * ns;
        auto* ph = sc.ph + b * ns;
        for (std::size_t i = 0; i < ns; ++i)
          ph[i] = ifac_[i] * (fh[i] + dt * nh[i]) * inv_n;
      }
      exec_inverse(count, sc.ph, sc.sbuf);
      nonlinear(sc.sbuf, count, sc.nh2);
      for (std::size_t b = 0; b < count; ++b) {
        const auto* fh = sc.fh + b * ns;
        const auto* nh = sc.nh + b * ns;
        const auto* nh2 = sc.nh2 + b * ns;
        auto* ph = sc.ph + b * ns;
        for (std::size_t i = 0; i < ns; ++i)
          ph[i] = (ifac_[i] * (fh[i] + 0.5 * dt * nh[i]) + 0.5 * dt * nh2[i]) * inv_n;
      }
      exec_inverse(count, sc.ph, sc.sbuf);
      std::memcpy(f.slab(m0), sc.sbuf, count * nxy * sizeof(double));
    }
  }
}

double FokkerPlanckStepper::m_stability_limit(const VectorField2D& u) const {
  Jacobian j = velocity_jacobian(u);
  double j11 = j.j11.max_abs(), j12 = j.j12.max_abs();
  double j21 = j.j21.max_abs(), j22 = j.j22.max_abs();
  double a1 = 0.0, a2 = 0.0;
  for (std::size_t i = 0; i < fm1a_.size(); ++i)
    a1 = std::max(a1, j11 * std::abs(fm1a_[i]) + j12 * std::abs(fm1b_[i]));
  for (std::size_t i = 0; i < fm2a_.size(); ++i)
    a2 = std::max(a2, j21 * std::abs(fm2a_[i]) + j22 * std::abs(fm2b_[i]));
  // Restoring drift and diffusion live inside the exponential-fitting rate.
  double rate = (a1 + a2) / mg_.h() + sg_rate_bound_;
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

DtSuggestion FokkerPlanckStepper::suggest_dt(const KineticDensity& f,
                                             const VectorField2D& u) const {
  (void)f;
  DtSuggestion s;
  const double h = mg_.h();
  Jacobian j = velocity_jacobian(u);
  double jmax = std::max(std::max(j.j11.max_abs(), j.j12.max_abs()),
                         std::max(j.j21.max_abs(), j.j22.max_abs()));
  double support = std::min(2.0 * cut_.alpha, std::sqrt(2.0) * mg_.lm);
  double flow = 2.0 * jmax * support;
  double restoring = eps_ * pot_.dU(support);
  double speed = flow + restoring;
  if (speed > 0.0) s.dt_m_advection = h / speed;
  if (sg_rate_bound_ > 0.0) s.dt_m_diffusion = 1.0 / sg_rate_bound_;
  double umax = u.max_abs();
  if (umax > 0.0) s.dt_x_advection = (kTwoPi / std::max(nx_, ny_)) / umax;

  const double safety = 0.4;
  double m_rate = (speed > 0.0 ? speed / h : 0.0) + sg_rate_bound_;
  double dt_m = m_rate > 0.0 ? 2.0 * safety / m_rate  // substeps run at dt/2
                             : std::numeric_limits<double>::infinity();
  double dt_x = 0.5 * s.dt_x_advection;
  s.dt = std::min(dt_m, dt_x);
  return s;
}

StepStats FokkerPlanckStepper::step_inplace(KineticDensity& f,
                                            const VectorField2D& u, double dt) {
  if (f.nx() != nx_ || f.ny() != ny_ || !(f.mgrid() == mg_))
    throw std::invalid_argument("FokkerPlanckStepper: grid mismatch");
  if (0.5 * dt > m_stability_limit(u))
    throw StepRejected("fp_step: configuration-space CFL violated at dt = " +
                       std::to_string(dt));
  double umax = u.max_abs();
  if (umax > 0.0 && dt > (kTwoPi / std::max(nx_, ny_)) / umax)
    throw StepRejected("fp_step: transport CFL violated at dt = " +
                       std::to_string(dt));

  Jacobian jac = velocity_jacobian(u);
  const auto& j11 = jac.j11.values();
  const auto& j12 = jac.j12.values();
  const auto& j21 = jac.j21.values();
  const auto& j22 = jac.j22.values();

  m_substep(f, 0.5 * dt, j11, j12, j21, j22, true);
  x_substep(f, u, dt);
  m_substep(f, 0.5 * dt, j11, j12, j21, j22, false);

  // Positivity guard: spectral transport can leave tiny undershoots.
  StepStats st;
  const std::size_t cells = mg_.cells(), xp = f.xpoints();
  std::vector<double> pmass(cells), pneg(cells), pmin(cells), pmax(cells);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t m = 0; m < std::ptrdiff_t(cells); ++m) {
    double* s = f.data() + std::size_t(m) * xp;
    double acc = 0.0, neg = 0.0, mn = s[0], mx = s[0];
    for (std::size_t c = 0; c < xp; ++c) {
      double v = s[c];
      acc += v;
      mn = std::min(mn, v);
      mx = std::max(mx, v);
      if (v < 0.0) {
        neg -= v;
        s[c] = 0.0;
      }
    }
    pmass[m] = acc;
    pneg[m] = neg;
    pmin[m] = mn;
    pmax[m] = mx;
  }
  double mass = 0.0, neg = 0.0, mn = pmin[0], mx = pmax[0];
  for (std::size_t m = 0; m < cells; ++m) {
    mass += pmass[m];
    neg += pneg[m];
    mn = std::min(mn, pmin[m]);
    mx = std::max(mx, pmax[m]);
  }
  st.min_before_clip = mx > 0.0 ? mn / mx : mn;
  st.clipped_mass_rel = mass != 0.0 ? neg / std::abs(mass) : 0.0;
  if (st.clipped_mass_rel > 1e-10)
    throw StabilityError("fp_step: clipped mass fraction " +
                         std::to_string(st.clipped_mass_rel) +
                         " exceeds tolerance");
  if (st.clipped_mass_rel > 1e-15) {
    double factor = mass / (mass + neg);
    double* fd = f.data();
    for (std::size_t i = 0; i < f.size(); ++i) fd[i] *= factor;
    st.renorm_factor = factor;
  }
  total_clipped_ += st.clipped_mass_rel;
  ++steps_;
  return st;
}

KineticDensity fp_step(const KineticDensity& f, const VectorField2D& u,
                       const PotentialSpec& pot, const CutoffProfile& cut,
                       double eps, double nu2, double dt, StepStats* stats) {
  FokkerPlanckStepper stepper(f.nx(), f.ny(), f.mgrid(), pot, cut, eps, nu2);
  KineticDensity out = f;
  StepStats st = stepper.step_inplace(out, u, dt);
  if (stats) *stats = st;
  return out;
}

DtSuggestion suggest_dt(const KineticDensity& f, const VectorField2D& u,
                        const PotentialSpec& pot, const CutoffProfile& cut,
                        double eps, double nu2) {
  FokkerPlanckStepper stepper(f.nx(), f.ny(), f.mgrid(), pot, cut, eps, nu2);
  return stepper.suggest_dt(f, u);
}

CutoffComparisonReport apply_cutoff_comparison(
    const KineticDensity& f0, const VectorField2D& u, const PotentialSpec& pot,
    double eps, double nu2, const std::vector<double>& alphas, double t_final) {
  CutoffComparisonReport rep;
  std::vector<StressField> stresses;
  std::vector<std::vector<SpectralField2D>> moments;
  KineticDensity last(f0.nx(), f0.ny(), f0.mgrid());
  double alpha_max = 0.0;

  // One shared step size so runs differ only through the cutoff.
  double dt_shared = std::numeric_limits<double>::infinity();
  for (double alpha : alphas) {
    if (alpha > f0.mgrid().lm / 2.0 + 1e-12)
      throw std::invalid_argument("apply_cutoff_comparison: alpha exceeds lm/2");
    FokkerPlanckStepper stepper(f0.nx(), f0.ny(), f0.mgrid(), pot,
                                CutoffProfile{alpha}, eps, nu2);
    dt_shared = std::min(dt_shared, stepper.suggest_dt(f0, u).dt);
  }
  std::uint64_t n_steps = std::uint64_t(std::ceil(t_final / dt_shared - 1e-9));
  dt_shared = t_final / double(n_steps);

  for (double alpha : alphas) {
    FokkerPlanckStepper stepper(f0.nx(), f0.ny(), f0.mgrid(), pot,
                                CutoffProfile{alpha}, eps, nu2);
    KineticDensity f = f0;
    for (std::uint64_t i = 0; i < n_steps; ++i)
      stepper.step_inplace(f, u, dt_shared);
    stresses.push_back(kramer_stress(f, pot.q));
    moments.push_back(extract_moment_fields(f, 2));
    if (alpha >= alpha_max) {
      alpha_max = alpha;
      last = f;
    }
  }

  for (std::size_t i = 0; i < alphas.size(); ++i) {
    CutoffComparisonEntry e;
    e.alpha = alphas[i];
    if (i > 0) {
      auto [l2, linf] = StressField::difference_norms(stresses[i], stresses[i - 1]);
      double base = stresses[i].frobenius_l2();
      e.sigma_diff_rel = base > 0.0 ? l2 / base : l2;
      (void)linf;
      double md = 0.0, mb = 0.0;
      for (std::size_t k = 0; k < moments[i].size(); ++k) {
        md += (moments[i][k] - moments[i - 1][k]).l2_norm();
        mb += moments[i][k].l2_norm();
      }
      e.moment_diff_rel = mb > 0.0 ? md / mb : md;
    }
    rep.entries.push_back(e);
  }

  // Pointwise truncation-tail estimate for the largest cutoff, valid for
  // alpha >= 1 and 2k < 4q.
  if (alpha_max >= 1.0) {
    CutoffProfile cut{alpha_max};
    const MGrid& g = last.mgrid();
    const std::size_t xp = last.xpoints();
    int qi = int(pot.q);
    std::vector<double> lhs(xp), m4q(xp);
    for (int k = 0; k < 2 * qi; ++k) {
      std::fill(lhs.begin(), lhs.end(), 0.0);
      std::fill(m4q.begin(), m4q.end(), 0.0);
      for (int i1 = 0; i1 < g.nm; ++i1)
        for (int i2 = 0; i2 < g.nm; ++i2) {
          double r = std::hypot(g.center(i1), g.center(i2));
          double wk = std::pow(r, 2 * k) * (1.0 - cut.psi(r));
          double w4 = std::pow(r, 4 * qi);
          const double* s = last.slab(i1, i2);
          for (std::size_t c = 0; c < xp; ++c) {
            lhs[c] += wk * s[c];
            m4q[c] += w4 * s[c];
          }
        }
      for (std::size_t c = 0; c < xp; ++c) {
        double defect = lhs[c] - m4q[c] / alpha_max;
        rep.tail_bound_worst =
            std::max(rep.tail_bound_worst, defect * g.cell_measure());
        if (defect > 1e-12 * std::max(1.0, m4q[c])) rep.tail_bound_ok = false;
      }
    }
  }
  return rep;
}

}  // namespace polykin
