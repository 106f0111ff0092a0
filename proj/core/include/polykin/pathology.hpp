#pragma once

namespace polykin {

/// One-dimensional heat-flow entropy demonstration. Initial data is a sum of
/// n_max disjoint indicator bumps 1_{(10n - a_n, 10n + a_n)} with
/// a_n = c / ((n+1) log^2(n+1)) and c fixed so that sum a_n = 1 and
/// a_n < 1/2. The entropy int f log f dx is exactly 0 at t = 0, strictly
/// negative for t > 0, and decreases without bound as n_max grows.
namespace pathology {

/// The frozen bump-size constant c (1 / sum_k 1/((k+1) log^2(k+1))).
double bump_constant();
/// a_n for n >= 1.
double bump_halfwidth(int n);

/// Entropy at time t by exact erf-based heat-kernel quadrature (cost grows
/// linearly with n_max; intended for n_max up to a few thousand).
double entropy_quadrature(int n_max, double t);

/// Per-bump analytic estimate at t = 1: 2 sum a_n log a_n - 2 log(e sqrt(pi))
/// sum a_n, the closed-form summation that certifies divergence.
double entropy_bound(long long n_max);

/// Demo entry point: exact 0 at t = 0; quadrature for n_max below the
/// crossover (1000), the analytic summation beyond it (t = 1 semantics).
double entropy_pathology_demo(long long n_max, double t);

}  // namespace pathology
}  // namespace polykin
