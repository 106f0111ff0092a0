#include "polykin/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polykin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

SpectralField2D::SpectralField2D(int nx, int ny)
    : nx_(nx),
      ny_(ny),
      values_(std::size_t(nx) * ny, 0.0),
      coeffs_(std::size_t(nx) * (ny / 2 + 1), {0.0, 0.0}),
      values_ok_(true),
      coeffs_ok_(true) {
  if (!power_of_two(nx) || !power_of_two(ny))
    throw std::invalid_argument("SpectralField2D: grid sizes must be powers of two");
}

double SpectralField2D::dx() const { return kTwoPi / nx_; }
double SpectralField2D::x1(int i) const { return kTwoPi * i / nx_; }
double SpectralField2D::x2(int j) const { return kTwoPi * j / ny_; }

void SpectralField2D::sync_values() const {
  if (!values_ok_) {
    Fft2D::get(nx_, ny_).inverse(coeffs_.data(), values_.data());
    values_ok_ = true;
  }
}

void SpectralField2D::sync_coeffs() const {
  if (!coeffs_ok_) {
    Fft2D::get(nx_, ny_).forward(values_.data(), coeffs_.data());
    coeffs_ok_ = true;
  }
}

const std::vector<double>& SpectralField2D::values() const {
  sync_values();
  return values_;
}

const std::vector<std::complex<double>>& SpectralField2D::coeffs() const {
  sync_coeffs();
  return coeffs_;
}

std::vector<double>& SpectralField2D::mutable_values() {
  sync_values();
  coeffs_ok_ = false;
  return values_;
}

std::vector<std::complex<double>>& SpectralField2D::mutable_coeffs() {
  sync_coeffs();
  values_ok_ = false;
  return coeffs_;
}

SpectralField2D SpectralField2D::sample(
    int nx, int ny, const std::function<double(double, double)>& f) {
  SpectralField2D out(nx, ny);
  auto& v = out.mutable_values();
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j)
      v[std::size_t(i) * ny + j] = f(out.x1(i), out.x2(j));
  return out;
}

double SpectralField2D::mean() const {
  const auto& v = values();
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(size());
}

double SpectralField2D::max_abs() const {
  const auto& v = values();
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double SpectralField2D::l2_norm() const {
  const auto& v = values();
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s * dx() * dx());
}

double SpectralField2D::integral() const { return mean() * kTwoPi * kTwoPi; }

SpectralField2D& SpectralField2D::operator+=(const SpectralField2D& o) {
  auto& v = mutable_values();
  const auto& w = o.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += w[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator-=(const SpectralField2D& o) {
  auto& v = mutable_values();
  const auto& w = o.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= w[i];
  return *this;
}

SpectralField2D& SpectralField2D::operator*=(double s) {
  auto& v = mutable_values();
  for (double& x : v) x *= s;
  return *this;
}

SpectralField2D SpectralField2D::shifted(int di, int dj) const {
  SpectralField2D out(nx_, ny_);
  const auto& v = values();
  auto& w = out.mutable_values();
  for (int i = 0; i < nx_; ++i) {
    int ii = ((i + di) % nx_ + nx_) % nx_;
    for (int j = 0; j < ny_; ++j) {
      int jj = ((j + dj) % ny_ + ny_) % ny_;
      w[std::size_t(ii) * ny_ + jj] = v[std::size_t(i) * ny_ + j];
    }
  }
  return out;
}

double VectorField2D::max_abs() const {
  const auto& a = u1.values();
  const auto& b = u2.values();
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::hypot(a[i], b[i]));
  return m;
}

SpectralField2D operator+(SpectralField2D a, const SpectralField2D& b) {
  a += b;
  return a;
}
SpectralField2D operator-(SpectralField2D a, const SpectralField2D& b) {
  a -= b;
  return a;
}
SpectralField2D operator*(double s, SpectralField2D a) {
  a *= s;
  return a;
}

SpectralField2D derivative(const SpectralField2D& f, int axis) {
  SpectralField2D out(f.nx(), f.ny());
  const auto& c = f.coeffs();
  auto& d = out.mutable_coeffs();
  const int nx = f.nx(), ny = f.ny(), nyh = ny / 2 + 1;
  for (int j0 = 0; j0 < nx; ++j0) {
    int k1 = wavenumber(j0, nx);
    if (j0 == nx / 2) k1 = 0;  // Nyquist zeroed for odd derivatives
    for (int j1 = 0; j1 < nyh; ++j1) {
      int k2 = (j1 == ny / 2) ? 0 : j1;
      double k = axis == 0 ? double(k1) : double(k2);
      d[std::size_t(j0) * nyh + j1] =
          std::complex<double>(0.0, k) * c[std::size_t(j0) * nyh + j1];
    }
  }
  return out;
}

VectorField2D gradient(const SpectralField2D& f) {
  return VectorField2D(derivative(f, 0), derivative(f, 1));
}

SpectralField2D laplacian(const SpectralField2D& f) {
  SpectralField2D out(f.nx(), f.ny());
  const auto& c = f.coeffs();
  auto& d = out.mutable_coeffs();
  const int nx = f.nx(), ny = f.ny(), nyh = ny / 2 + 1;
  for (int j0 = 0; j0 < nx; ++j0) {
    double k1 = wavenumber(j0, nx);
    for (int j1 = 0; j1 < nyh; ++j1) {
      double k2 = j1;
      d[std::size_t(j0) * nyh + j1] =
          -(k1 * k1 + k2 * k2) * c[std::size_t(j0) * nyh + j1];
    }
  }
  return out;
}

SpectralField2D divergence(const VectorField2D& v) {
  return derivative(v.u1, 0) + derivative(v.u2, 1);
}

SpectralField2D inverse_laplacian(const SpectralField2D& f) {
  SpectralField2D out(f.nx(), f.ny());
  const auto& c = f.coeffs();
  auto& d = out.mutable_coeffs();
  const int nx = f.nx(), ny = f.ny(), nyh = ny / 2 + 1;
  for (int j0 = 0; j0 < nx; ++j0) {
    double k1 = wavenumber(j0, nx);
    for (int j1 = 0; j1 < nyh; ++j1) {
      double k2 = j1;
      double ksq = k1 * k1 + k2 * k2;
      d[std::size_t(j0) * nyh + j1] =
          ksq == 0.0 ? 0.0 : c[std::size_t(j0) * nyh + j1] / (-ksq);
    }
  }
  return out;
}

VectorField2D leray_project(const VectorField2D& v) {
  VectorField2D out(v.nx(), v.ny());
  const auto& c1 = v.u1.coeffs();
  const auto& c2 = v.u2.coeffs();
  auto& d1 = out.u1.mutable_coeffs();
  auto& d2 = out.u2.mutable_coeffs();
  const int nx = v.nx(), ny = v.ny(), nyh = ny / 2 + 1;
  for (int j0 = 0; j0 < nx; ++j0) {
    double k1 = wavenumber(j0, nx);
    for (int j1 = 0; j1 < nyh; ++j1) {
      double k2 = j1;
      std::size_t idx = std::size_t(j0) * nyh + j1;
      double ksq = k1 * k1 + k2 * k2;
      if (ksq == 0.0) {
        d1[idx] = c1[idx];
        d2[idx] = c2[idx];
      } else {
        auto kd = (k1 * c1[idx] + k2 * c2[idx]) / ksq;
        d1[idx] = c1[idx] - k1 * kd;
        d2[idx] = c2[idx] - k2 * kd;
      }
    }
  }
  return out;
}

void dealias_inplace(SpectralField2D& f) {
  auto& c = f.mutable_coeffs();
  const int nx = f.nx(), ny = f.ny(), nyh = ny / 2 + 1;
  const int kmax1 = nx / 3, kmax2 = ny / 3;
  for (int j0 = 0; j0 < nx; ++j0) {
    int k1 = std::abs(wavenumber(j0, nx));
    for (int j1 = 0; j1 < nyh; ++j1) {
      if (k1 > kmax1 || j1 > kmax2) c[std::size_t(j0) * nyh + j1] = 0.0;
    }
  }
}

SpectralField2D dealias(const SpectralField2D& f) {
  SpectralField2D out = f;
  dealias_inplace(out);
  return out;
}

SpectralField2D multiply_dealias(const SpectralField2D& a, const SpectralField2D& b) {
  SpectralField2D out(a.nx(), a.ny());
  const auto& va = a.values();
  const auto& vb = b.values();
  auto& v = out.mutable_values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = va[i] * vb[i];
  dealias_inplace(out);
  return out;
}

double Jacobian::max_abs() const {
  double m = 0.0;
  for (const auto* f : {&j11, &j12, &j21, &j22}) m = std::max(m, f->max_abs());
  return m;
}

Jacobian velocity_jacobian(const VectorField2D& u) {
  Jacobian j(u.nx(), u.ny());
  j.j11 = derivative(u.u1, 0);
  j.j12 = derivative(u.u1, 1);
  j.j21 = derivative(u.u2, 0);
  j.j22 = derivative(u.u2, 1);
  return j;
}

double spectral_power(const SpectralField2D& f) {
  const auto& c = f.coeffs();
  const int nx = f.nx(), ny = f.ny(), nyh = ny / 2 + 1;
  double s = 0.0;
  for (int j0 = 0; j0 < nx; ++j0) {
    for (int j1 = 0; j1 < nyh; ++j1) {
      double w = (j1 == 0 || j1 == ny / 2) ? 1.0 : 2.0;  // conjugate pair weight
      s += w * std::norm(c[std::size_t(j0) * nyh + j1]);
    }
  }
  return s;
}

}  // namespace polykin
