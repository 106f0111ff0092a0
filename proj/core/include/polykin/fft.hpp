#pragma once

#include <complex>
#include <cstddef>

namespace polykin {

/// Real-to-complex 2D FFT pair for a fixed (nx, ny) grid, row-major with
/// the second index fastest. Plans are created unaligned so the same plan
/// can execute on any buffer; execution is thread-safe, planning is not
/// (guarded internally).
class Fft2D {
public:
  Fft2D(int nx, int ny);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  /// Number of retained complex coefficients: nx * (ny/2 + 1).
  std::size_t spectral_size() const { return std::size_t(nx_) * (ny_ / 2 + 1); }

  /// values -> coeffs, normalized so that a unit constant maps to
  /// coeff[k=0] = 1 (i.e. forward divides by nx*ny).
  void forward(const double* values, std::complex<double>* coeffs) const;
  /// coeffs -> values (input preserved).
  void inverse(const std::complex<double>* coeffs, double* values) const;

  /// Shared plan per grid size.
  static const Fft2D& get(int nx, int ny);

private:
  int nx_, ny_;
  void* fwd_;
  void* inv_;
};

/// Integer wavenumber along an axis of size n for index j (Nyquist maps to
/// +n/2; derivative operators zero it explicitly).
inline int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace polykin
