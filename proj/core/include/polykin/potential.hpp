#pragma once

#include <vector>

namespace polykin {

/// Spring potential U(m) = |m|^{2q}, q >= 1.
struct PotentialSpec {
  double q = 1.0;

  double U(double r) const;        ///< as a function of r = |m|
  double dU(double r) const;       ///< U'(r) = 2q r^{2q-1}
  bool hookean() const { return q == 1.0; }
};

/// Smooth radial cutoff psi_alpha(m) = Psi(|m|/alpha) with Psi == 1 on [0,1]
/// and Psi == 0 on [2, inf), built from the standard C^inf bump quotient.
struct CutoffProfile {
  double alpha = 1.0;

  double psi(double r) const;      ///< psi_alpha at radius r
  static double profile(double s); ///< Psi(s)
};

/// Effective radial potential of the truncated restoring drift:
/// Utilde(r) = int_0^r psi_alpha(s) U'(s) ds, so grad Utilde = psi_alpha
/// grad U. Tabulated once per (potential, cutoff, radius range); lookups
/// interpolate the cumulative table and are exact (equal to U) for
/// r <= alpha.
class TruncatedPotential {
public:
  TruncatedPotential(const PotentialSpec& pot, const CutoffProfile& cut,
                     double r_max, int table_size = 8192);

  double value(double r) const;
  double alpha() const { return alpha_; }

private:
  double alpha_;
  double r_max_;
  double dr_;
  double u_at_alpha_;
  PotentialSpec pot_;
  std::vector<double> table_;  ///< cumulative integral on [alpha, r_max]
};

}  // namespace polykin
