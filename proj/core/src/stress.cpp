#include "polykin/stress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polykin {

double StressField::trace_l1() const {
  const auto& a = s11.values();
  const auto& c = s22.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] + c[i]);
  return sum * s11.dx() * s11.dx();
}

double StressField::frobenius_l2() const {
  const auto& a = s11.values();
  const auto& b = s12.values();
  const auto& c = s22.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += a[i] * a[i] + 2.0 * b[i] * b[i] + c[i] * c[i];
  return std::sqrt(sum * s11.dx() * s11.dx());
}

std::pair<double, double> StressField::difference_norms(const StressField& x,
                                                        const StressField& y) {
  const auto& a1 = x.s11.values();
  const auto& b1 = x.s12.values();
  const auto& c1 = x.s22.values();
  const auto& a2 = y.s11.values();
  const auto& b2 = y.s12.values();
  const auto& c2 = y.s22.values();
  double sum = 0.0, linf = 0.0;
  for (std::size_t i = 0; i < a1.size(); ++i) {
    double da = a1[i] - a2[i], db = b1[i] - b2[i], dc = c1[i] - c2[i];
    sum += da * da + 2.0 * db * db + dc * dc;
    linf = std::max(linf, std::sqrt(da * da + 2.0 * db * db + dc * dc));
  }
  return {std::sqrt(sum * x.s11.dx() * x.s11.dx()), linf};
}

double StressField::shear_trace_defect() const {
  const auto& a = s11.values();
  const auto& b = s12.values();
  const auto& c = s22.values();
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(b[i]) - 0.5 * (a[i] + c[i]));
  return worst;
}

void StressField::dealias_all() {
  dealias_inplace(s11);
  dealias_inplace(s12);
  dealias_inplace(s22);
}

}  // namespace polykin
