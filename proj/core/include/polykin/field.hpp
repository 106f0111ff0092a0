#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "polykin/fft.hpp"

namespace polykin {

/// Real scalar field on the uniform periodic grid over [0, 2pi)^2 together
/// with its Fourier coefficients. The two representations are synchronized
/// lazily; mutate through values() / coeffs() and the other side is
/// recomputed on demand. Grid sizes must be powers of two.
class SpectralField2D {
public:
  SpectralField2D(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return std::size_t(nx_) * ny_; }
  std::size_t spectral_size() const { return std::size_t(nx_) * (ny_ / 2 + 1); }

  double dx() const;
  /// Grid coordinate of sample (i, j).
  double x1(int i) const;
  double x2(int j) const;

  /// Read access (synchronizes as needed).
  const std::vector<double>& values() const;
  const std::vector<std::complex<double>>& coeffs() const;
  double value(int i, int j) const { return values()[std::size_t(i) * ny_ + j]; }
  std::complex<double> coeff(int j0, int j1) const {
    return coeffs()[std::size_t(j0) * (ny_ / 2 + 1) + j1];
  }

  /// Write access; marks the other representation stale.
  std::vector<double>& mutable_values();
  std::vector<std::complex<double>>& mutable_coeffs();

  /// Build from a function of (x1, x2).
  static SpectralField2D sample(int nx, int ny,
                                const std::function<double(double, double)>& f);
  static SpectralField2D zero(int nx, int ny) { return SpectralField2D(nx, ny); }

  double mean() const;
  double max_abs() const;
  double l2_norm() const;       ///< sqrt(int |f|^2 dx) over [0,2pi)^2
  double integral() const;      ///< int f dx

  SpectralField2D& operator+=(const SpectralField2D& o);
  SpectralField2D& operator-=(const SpectralField2D& o);
  SpectralField2D& operator*=(double s);

  /// Cyclic shift by whole grid cells (values roll; used by translation tests).
  SpectralField2D shifted(int di, int dj) const;

private:
  int nx_, ny_;
  mutable std::vector<double> values_;
  mutable std::vector<std::complex<double>> coeffs_;
  mutable bool values_ok_, coeffs_ok_;
  void sync_values() const;
  void sync_coeffs() const;
};

struct VectorField2D {
  SpectralField2D u1, u2;
  VectorField2D(int nx, int ny) : u1(nx, ny), u2(nx, ny) {}
  VectorField2D(SpectralField2D a, SpectralField2D b)
      : u1(std::move(a)), u2(std::move(b)) {}
  int nx() const { return u1.nx(); }
  int ny() const { return u1.ny(); }
  double max_abs() const;
};

SpectralField2D operator+(SpectralField2D a, const SpectralField2D& b);
SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b);
SpectralField2D operator*(double s, SpectralField2D a);

/// Spectral partial derivatives; exact for band-limited fields. The Nyquist
/// mode is zeroed so odd derivatives stay real-valued.
SpectralField2D derivative(const SpectralField2D& f, int axis);
VectorField2D gradient(const SpectralField2D& f);
SpectralField2D laplacian(const SpectralField2D& f);
SpectralField2D divergence(const VectorField2D& v);
/// Inverse Laplacian with zero mean (k = 0 mode set to 0).
SpectralField2D inverse_laplacian(const SpectralField2D& f);

/// Orthogonal projection onto divergence-free fields; preserves the k = 0
/// mode and is idempotent.
VectorField2D leray_project(const VectorField2D& v);

/// 2/3-rule: zero all coefficients with |k_i| > n_i/3.
SpectralField2D dealias(const SpectralField2D& f);
void dealias_inplace(SpectralField2D& f);

/// Pointwise product followed by dealiasing (pseudo-spectral product).
SpectralField2D multiply_dealias(const SpectralField2D& a, const SpectralField2D& b);

/// sum |f_k|^2 over the full (redundant) spectrum; equals mean of f^2 by
/// Parseval.
double spectral_power(const SpectralField2D& f);

/// Velocity gradient J_ab = du_a / dx_b (so (J m)_a = J_a1 m1 + J_a2 m2).
struct Jacobian {
  SpectralField2D j11, j12, j21, j22;
  Jacobian(int nx, int ny) : j11(nx, ny), j12(nx, ny), j21(nx, ny), j22(nx, ny) {}
  double max_abs() const;
};

Jacobian velocity_jacobian(const VectorField2D& u);

}  // namespace polykin
