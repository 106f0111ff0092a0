#include "polykin/pathology.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polykin {
namespace pathology {

namespace {

double series_total() {
  // sum_{k>=2} 1/(k log^2 k) via partial sum plus Euler-Maclaurin tail.
  static double cached = [] {
    const long long N = 10'000'000;
    double s = 0.0;
    for (long long k = N - 1; k >= 2; --k) {
      double l = std::log(double(k));
      s += 1.0 / (double(k) * l * l);
    }
    double lN = std::log(double(N));
    s += 1.0 / lN + 0.5 / (double(N) * lN * lN);
    return s;
  }();
  return cached;
}

}  // namespace

double bump_constant() { return 1.0 / series_total(); }

double bump_halfwidth(int n) {
  double l = std::log(double(n + 1));
  return bump_constant() / (double(n + 1) * l * l);
}

double entropy_quadrature(int n_max, double t) {
  if (n_max < 1) throw std::invalid_argument("entropy_quadrature: n_max >= 1");
  if (t < 0.0) throw std::invalid_argument("entropy_quadrature: t >= 0");
  if (t == 0.0) return 0.0;  // f0 is an indicator; s log s vanishes pointwise

  const double sq = 2.0 * std::sqrt(t);
  const double window = 8.0 * std::sqrt(t) + 2.0;
  auto f = [&](double x) {
    // Only bumps within the window contribute beyond double precision.
    int lo = std::max(1, int((x - window) / 10.0));
    int hi = std::min(n_max, int((x + window) / 10.0) + 1);
    double s = 0.0;
    for (int n = lo; n <= hi; ++n) {
      double a = bump_halfwidth(n);
      double p = 10.0 * n;
      s += 0.5 * (std::erf((x - (p - a)) / sq) - std::erf((x - (p + a)) / sq));
    }
    return s;
  };

  const double x0 = 10.0 - window;
  const double x1 = 10.0 * n_max + window;
  const int per_unit = 160;  // composite Simpson resolution
  const long long cells = llround((x1 - x0) * per_unit);
  const double h = (x1 - x0) / double(cells);
  auto phi = [](double s) { return s > 0.0 ? s * std::log(s) : 0.0; };
  double sum = phi(f(x0)) + phi(f(x1));
  for (long long i = 1; i < cells; ++i)
    sum += (i % 2 == 1 ? 4.0 : 2.0) * phi(f(x0 + i * h));
  return sum * h / 3.0;
}

double entropy_bound(long long n_max) {
  const double c = bump_constant();
  const double charge = 1.0 + 0.5 * std::log(std::numbers::pi);  // log(e sqrt(pi))
  double s = 0.0;
  for (long long n = 1; n <= n_max; ++n) {
    double l = std::log(double(n + 1));
    double a = c / (double(n + 1) * l * l);
    s += a * (std::log(a) - charge);
  }
  return 2.0 * s;
}

double entropy_pathology_demo(long long n_max, double t) {
  if (t == 0.0) return 0.0;
  if (n_max <= 1000) return entropy_quadrature(int(n_max), t);
  return entropy_bound(n_max);
}

}  // namespace pathology
}  // namespace polykin
