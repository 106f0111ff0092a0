#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "polykin/field.hpp"

using namespace polykin;

namespace {

SpectralField2D random_band_limited(int n, unsigned seed, int kmax) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SpectralField2D f(n, n);
  auto& v = f.mutable_values();
  for (double& x : v) x = unif(rng);
  // Restrict to |k| <= kmax so products stay representable.
  auto& c = f.mutable_coeffs();
  const int nyh = n / 2 + 1;
  for (int j0 = 0; j0 < n; ++j0) {
    int k1 = std::abs(wavenumber(j0, n));
    for (int j1 = 0; j1 < nyh; ++j1)
      if (k1 > kmax || j1 > kmax) c[std::size_t(j0) * nyh + j1] = 0.0;
  }
  return f;
}

}  // namespace

TEST_CASE("round trip between samples and coefficients") {
  auto f = random_band_limited(32, 7, 10);
  std::vector<double> orig = f.values();
  SpectralField2D g(32, 32);
  g.mutable_coeffs() = f.coeffs();
  double scale = f.max_abs();
  for (std::size_t i = 0; i < orig.size(); ++i)
    CHECK(std::abs(g.values()[i] - orig[i]) <= 1e-12 * scale);
}

TEST_CASE("Parseval identity") {
  auto f = random_band_limited(32, 21, 10);
  const auto& v = f.values();
  double direct = 0.0;
  for (double x : v) direct += x * x;
  direct /= double(v.size());
  CHECK(std::abs(spectral_power(f) - direct) <= 1e-12 * direct);
}

TEST_CASE("gradient of a constant vanishes") {
  auto f = SpectralField2D::sample(16, 16, [](double, double) { return 3.5; });
  auto g = gradient(f);
  CHECK(g.u1.max_abs() <= 1e-14);
  CHECK(g.u2.max_abs() <= 1e-14);
}

TEST_CASE("gradient of sin(x1)") {
  auto f = SpectralField2D::sample(32, 32,
                                   [](double x, double) { return std::sin(x); });
  auto g = gradient(f);
  auto expect = SpectralField2D::sample(32, 32,
                                        [](double x, double) { return std::cos(x); });
  CHECK((g.u1 - expect).max_abs() <= 1e-13);
  CHECK(g.u2.max_abs() <= 1e-13);
}

TEST_CASE("gradient of a two-mode product matches the closed form") {
  auto f = SpectralField2D::sample(64, 64, [](double x, double y) {
    return std::sin(2 * x) * std::cos(3 * y);
  });
  auto g = gradient(f);
  auto d1 = SpectralField2D::sample(64, 64, [](double x, double y) {
    return 2 * std::cos(2 * x) * std::cos(3 * y);
  });
  auto d2 = SpectralField2D::sample(64, 64, [](double x, double y) {
    return -3 * std::sin(2 * x) * std::sin(3 * y);
  });
  CHECK((g.u1 - d1).max_abs() <= 1e-12);
  CHECK((g.u2 - d2).max_abs() <= 1e-12);
}

TEST_CASE("laplacian closed forms") {
  auto c = SpectralField2D::sample(16, 16, [](double, double) { return 2.0; });
  CHECK(laplacian(c).max_abs() <= 1e-14);

  auto s = SpectralField2D::sample(32, 32,
                                   [](double x, double) { return std::sin(x); });
  CHECK((laplacian(s) + s).max_abs() <= 1e-13);

  auto f = SpectralField2D::sample(64, 64, [](double x, double y) {
    return std::sin(2 * x) * std::cos(3 * y);
  });
  CHECK((laplacian(f) + 13.0 * f).max_abs() <= 1e-11);
}

TEST_CASE("projection annihilates pure gradients") {
  auto phi = SpectralField2D::sample(32, 32,
                                     [](double x, double) { return -std::cos(x); });
  auto v = gradient(phi);
  auto p = leray_project(v);
  CHECK(p.u1.max_abs() <= 1e-13);
  CHECK(p.u2.max_abs() <= 1e-13);
}

TEST_CASE("projection keeps solenoidal fields and is idempotent") {
  VectorField2D v(SpectralField2D::sample(
                      32, 32, [](double, double y) { return std::sin(y); }),
                  SpectralField2D(32, 32));
  auto p = leray_project(v);
  CHECK((p.u1 - v.u1).max_abs() <= 1e-13);

  auto w = VectorField2D(random_band_limited(32, 3, 9),
                         random_band_limited(32, 4, 9));
  auto p1 = leray_project(w);
  auto p2 = leray_project(p1);
  CHECK((p1.u1 - p2.u1).max_abs() <= 1e-12);
  CHECK((p1.u2 - p2.u2).max_abs() <= 1e-12);

  double div = divergence(p1).max_abs();
  CHECK(div <= 1e-10 * std::max(1.0, w.max_abs()));
}

TEST_CASE("two-thirds rule") {
  auto low = random_band_limited(32, 9, 10);  // 10 = floor(32/3)
  CHECK((dealias(low) - low).max_abs() <= 1e-13);

  SpectralField2D nyq(32, 32);
  nyq.mutable_coeffs()[std::size_t(16) * 17] = 1.0;  // k = (nx/2, 0)
  CHECK(dealias(nyq).max_abs() <= 1e-15);
}

TEST_CASE("dealiased product equals the truncated exact convolution") {
  const int n = 8;
  auto a = random_band_limited(n, 31, 2);
  auto b = random_band_limited(n, 32, 2);
  auto prod = multiply_dealias(a, b);

  // Direct convolution over the full integer spectrum.
  auto full = [&](const SpectralField2D& f, int k1, int k2) {
    std::complex<double> s = 0.0;
    const auto& v = f.values();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double phase = -(k1 * f.x1(i) + k2 * f.x2(j));
        s += v[std::size_t(i) * n + j] *
             std::complex<double>(std::cos(phase), std::sin(phase));
      }
    return s / double(n * n);
  };
  for (int k1 = -2; k1 <= 2; ++k1) {
    for (int k2 = 0; k2 <= 2; ++k2) {
      std::complex<double> conv = 0.0;
      for (int p1 = -2; p1 <= 2; ++p1)
        for (int p2 = -2; p2 <= 2; ++p2)
          conv += full(a, p1, p2) * full(b, k1 - p1, k2 - p2);
      int j0 = k1 >= 0 ? k1 : k1 + n;
      auto got = prod.coeff(j0, k2);
      CHECK(std::abs(got - conv) <= 1e-12);
    }
  }
}

TEST_CASE("derivatives commute with grid translation") {
  auto f = random_band_limited(32, 77, 10);
  auto a = laplacian(f).shifted(1, 0);
  auto b = laplacian(f.shifted(1, 0));
  CHECK((a - b).max_abs() <= 1e-12);

  auto ga = gradient(f);
  auto gb = gradient(f.shifted(0, 1));
  CHECK((ga.u1.shifted(0, 1) - gb.u1).max_abs() <= 1e-12);
}

TEST_CASE("projection preserves the mean mode") {
  SpectralField2D c1(16, 16), c2(16, 16);
  c1.mutable_values().assign(256, 1.25);
  c2.mutable_values().assign(256, -0.5);
  auto p = leray_project(VectorField2D(c1, c2));
  CHECK(p.u1.mean() == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(p.u2.mean() == doctest::Approx(-0.5).epsilon(1e-14));
}
