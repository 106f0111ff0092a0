#pragma once

#include <cstddef>

namespace polykin {

/// Uniform cell-centered grid over the configuration box [-lm, lm]^2,
/// nm cells per axis. Integrals over the box are midpoint sums with the
/// cell measure h^2, matching the finite-volume kinetic discretization.
struct MGrid {
  int nm = 0;
  double lm = 0.0;

  double h() const { return 2.0 * lm / nm; }
  double cell_measure() const { return h() * h(); }
  double center(int i) const { return -lm + (i + 0.5) * h(); }
  std::size_t cells() const { return std::size_t(nm) * nm; }
  std::size_t index(int i1, int i2) const { return std::size_t(i1) * nm + i2; }
  bool operator==(const MGrid&) const = default;
};

/// Non-owning view of a single x-point's configuration-space block
/// (row-major over (m1, m2) cell indices).
struct DensitySlice {
  const double* f = nullptr;
  MGrid grid;
};

}  // namespace polykin
