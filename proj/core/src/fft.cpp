#include "polykin/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace polykin {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// Aligned per-thread scratch sized for the largest grid seen so far.
struct Scratch {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  std::size_t real_n = 0, spec_n = 0;

  void ensure(std::size_t rn, std::size_t sn) {
    if (rn > real_n) {
      fftw_free(real);
      real = fftw_alloc_real(rn);
      real_n = rn;
    }
    if (sn > spec_n) {
      fftw_free(spec);
      spec = fftw_alloc_complex(sn);
      spec_n = sn;
    }
  }
  ~Scratch() {
    fftw_free(real);
    fftw_free(spec);
  }
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

}  // namespace

Fft2D::Fft2D(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("Fft2D: grid too small");
  std::lock_guard<std::mutex> lock(planner_mutex());
  double* real = fftw_alloc_real(std::size_t(nx) * ny);
  fftw_complex* spec = fftw_alloc_complex(spectral_size());
  fwd_ = fftw_plan_dft_r2c_2d(nx, ny, real, spec, FFTW_MEASURE);
  inv_ = fftw_plan_dft_c2r_2d(nx, ny, spec, real, FFTW_MEASURE);
  fftw_free(real);
  fftw_free(spec);
  if (!fwd_ || !inv_) throw std::runtime_error("Fft2D: plan creation failed");
}

Fft2D::~Fft2D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(inv_));
}

void Fft2D::forward(const double* values, std::complex<double>* coeffs) const {
  const std::size_t n = std::size_t(nx_) * ny_;
  const std::size_t ns = spectral_size();
  Scratch& s = scratch();
  s.ensure(n, ns);
  std::memcpy(s.real, values, n * sizeof(double));
  fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), s.real, s.spec);
  const double norm = 1.0 / double(n);
  const auto* src = reinterpret_cast<const std::complex<double>*>(s.spec);
  for (std::size_t i = 0; i < ns; ++i) coeffs[i] = src[i] * norm;
}

void Fft2D::inverse(const std::complex<double>* coeffs, double* values) const {
  const std::size_t n = std::size_t(nx_) * ny_;
  const std::size_t ns = spectral_size();
  Scratch& s = scratch();
  s.ensure(n, ns);
  std::memcpy(s.spec, coeffs, ns * sizeof(fftw_complex));
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), s.spec, s.real);
  std::memcpy(values, s.real, n * sizeof(double));
}

const Fft2D& Fft2D::get(int nx, int ny) {
  static std::mutex reg_mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<Fft2D>> registry;
  std::lock_guard<std::mutex> lock(reg_mutex);
  auto key = std::make_pair(nx, ny);
  auto it = registry.find(key);
  if (it == registry.end())
    it = registry.emplace(key, std::make_unique<Fft2D>(nx, ny)).first;
  return *it->second;
}

}  // namespace polykin
