#pragma once

#include "polykin/field.hpp"

namespace polykin {

/// Symmetric 2x2 tensor field (polymeric stress).
struct StressField {
  SpectralField2D s11, s12, s22;

  StressField(int nx, int ny) : s11(nx, ny), s12(nx, ny), s22(nx, ny) {}

  int nx() const { return s11.nx(); }
  int ny() const { return s11.ny(); }

  /// ||Tr sigma||_{L1} over the torus.
  double trace_l1() const;
  /// sqrt(int s11^2 + 2 s12^2 + s22^2 dx).
  double frobenius_l2() const;
  /// Frobenius norm of the pointwise difference, L2 and Linf.
  static std::pair<double, double> difference_norms(const StressField& a,
                                                    const StressField& b);
  /// max over grid points of |s12| - Tr(sigma)/2 (<= 0 when the pointwise
  /// shear bound holds).
  double shear_trace_defect() const;

  void dealias_all();
};

}  // namespace polykin
