#include "polykin/potential.hpp"

#include <cmath>
#include <stdexcept>

namespace polykin {

double PotentialSpec::U(double r) const { return std::pow(r * r, q); }

double PotentialSpec::dU(double r) const {
  if (r == 0.0) return 0.0;
  return 2.0 * q * std::pow(r * r, q - 1.0) * r;
}

double CutoffProfile::profile(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  auto bump = [](double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; };
  double a = bump(2.0 - s), b = bump(s - 1.0);
  return a / (a + b);
}

double CutoffProfile::psi(double r) const { return profile(r / alpha); }

TruncatedPotential::TruncatedPotential(const PotentialSpec& pot,
                                       const CutoffProfile& cut, double r_max,
                                       int table_size)
    : alpha_(cut.alpha), r_max_(r_max), pot_(pot) {
  if (alpha_ <= 0.0) throw std::invalid_argument("TruncatedPotential: alpha <= 0");
  u_at_alpha_ = pot.U(alpha_);
  if (r_max_ <= alpha_) return;  // cutoff support never reached
  dr_ = (r_max_ - alpha_) / table_size;
  table_.resize(table_size + 1);
  table_[0] = 0.0;
  // Cumulative Simpson on each sub-interval of the smooth integrand.
  for (int i = 0; i < table_size; ++i) {
    double a = alpha_ + i * dr_;
    double b = a + dr_;
    double mid = 0.5 * (a + b);
    auto g = [&](double r) { return cut.psi(r) * pot_.dU(r); };
    table_[i + 1] = table_[i] + dr_ / 6.0 * (g(a) + 4.0 * g(mid) + g(b));
  }
}

double TruncatedPotential::value(double r) const {
  if (r <= alpha_) return pot_.U(r);
  if (table_.empty()) return u_at_alpha_;
  double s = (std::min(r, r_max_) - alpha_) / dr_;
  int i = std::min(int(s), int(table_.size()) - 2);
  double frac = s - i;
  return u_at_alpha_ + table_[i] + frac * (table_[i + 1] - table_[i]);
}

}  // namespace polykin
