#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "polykin/mgrid.hpp"

namespace polykin {

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Finitely supported (signed) measure on R^2_m.
struct DiscreteMeasure {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  bool signed_measure = false;  ///< negative weights permitted when set

  std::size_t size() const { return points.size(); }
  void add(double m1, double m2, double w);
  double total_variation() const;

  /// M_{a,b} = sum_i w_i m1_i^a m2_i^b (exact summation).
  double moment(int a, int b) const;
  /// Radial absolute moment against |mu|: sum_i |w_i| |m_i|^k.
  double radial_moment(int k) const;
};

/// Triangular table of moments M_{a,b} for a+b <= degree plus radial
/// absolute moments Mbar_k for k <= degree.
class MomentTable {
public:
  explicit MomentTable(int degree);

  int degree() const { return degree_; }
  double& at(int a, int b);
  double at(int a, int b) const;
  /// Zero for negative indices, capacity error above the table degree.
  double value_or_zero(int a, int b) const;
  double& mbar(int k);
  double mbar(int k) const;

  static MomentTable from_measure(const DiscreteMeasure& mu, int degree);
  /// Tensor-product midpoint quadrature against a density slice.
  static MomentTable from_slice(const DensitySlice& s, int degree);

  /// max |M_{a,b}| - Mbar_{a+b} over the table (<= 0 for true moment data).
  double domination_defect() const;

private:
  int degree_;
  std::vector<double> m_;
  std::vector<double> mbar_;
  std::size_t idx(int a, int b) const;
};

/// Moment of a density slice, midpoint quadrature.
double slice_moment(const DensitySlice& s, int a, int b);
double slice_radial_moment(const DensitySlice& s, int k);

/// Symmetric 2x2 tensor value.
struct SymMat2 {
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  double trace() const { return s11 + s22; }
  double frobenius() const;
};

/// Stress integrand 2q |m|^{2(q-1)} m (x) m against a density slice.
SymMat2 kramer_stress_slice(const DensitySlice& s, double q);

// ---------------------------------------------------------------------------
// Positive semidefiniteness of a moment sequence (Riesz functional testing)
// ---------------------------------------------------------------------------

struct PsdWitness {
  std::vector<std::array<int, 2>> monomials;  ///< exponents of h's terms
  std::vector<double> coeffs;
  double value = 0.0;  ///< L(h^2), negative for a witness
};

struct PsdResult {
  bool passed = true;
  std::optional<PsdWitness> witness;
};

/// Evaluates the Riesz functional L(h^2) for random polynomials h of degree
/// <= max_poly_degree (seeded) plus the deterministic monomials x1^k, x2^k.
/// The table must cover degree 2*max_poly_degree.
PsdResult psd_check(const MomentTable& m, int trials, int max_poly_degree,
                    std::uint64_t seed);

/// L(h^2) for an explicit polynomial given as monomial/coefficient lists.
double riesz_square(const MomentTable& m,
                    const std::vector<std::array<int, 2>>& monomials,
                    const std::vector<double>& coeffs);

// ---------------------------------------------------------------------------
// Carleman partial sums
// ---------------------------------------------------------------------------

struct CarlemanReport {
  std::vector<double> partial_sums_axis1;  ///< S_n = sum_{j<=n} m_{2j,0}^{-1/(2j)}
  std::vector<double> partial_sums_axis2;
  std::string caveat;
};

/// Partial sums of the moment-growth series along each axis, n = 1..N.
/// Divergence of the full series is not decidable from finitely many terms;
/// the report carries that caveat explicitly.
CarlemanReport carleman_partial_sums(const MomentTable& m, int N);

// ---------------------------------------------------------------------------
// Gaussian mollification via the binomial transfer formula
// ---------------------------------------------------------------------------

/// Moment of the centered 2D Gaussian with standard deviation delta.
double gaussian_moment(int p, int q, double delta);

/// Moments of g_delta * mu computed exactly:
/// M_{a,b} = sum C(a,p) C(b,q) M_{p,q}[g_delta] M_{a-p,b-q}[mu].
MomentTable mollify(const DiscreteMeasure& mu, double delta, int degree);

// ---------------------------------------------------------------------------
// Exponential-generating-function norms over moments
// ---------------------------------------------------------------------------

enum class XrVariant { Full, Even };

struct XrNormResult {
  double value = 0.0;
  /// Ratio of the last retained term to the partial sum; crude tail
  /// indicator for the truncated series.
  double tail_ratio = 0.0;
  int degree = 0;
};

/// F(r) = sum_{p<=N} ||Mbar_p||_L2 r^p / p! (or even-degree-only variant),
/// given the per-degree L2(x) norms of the radial moments.
XrNormResult x_r_norm(const std::vector<double>& mbar_l2, double r,
                      XrVariant variant);

/// Per-degree L2 norms of a single table (point-mass x-measure).
std::vector<double> mbar_norms(const MomentTable& m);

// ---------------------------------------------------------------------------
// Reference moment values
// ---------------------------------------------------------------------------

/// <m1^a m2^b> under the normalized equilibrium density e^{-|m|^{2q}}/Z,
/// via Gamma-function closed forms (zero for odd a or b).
double equilibrium_moment(int a, int b, double q);
/// Z = int e^{-|m|^{2q}} dm = pi Gamma(1/q) / q.
double equilibrium_partition(double q);

/// Radial quadrature int_0^infty r^{k+1} w(r) dr by Gauss-Legendre panels;
/// used by the closed-form density fixtures.
double radial_integral(int k, const std::function<double(double)>& w,
                       double r_max, int panels = 256);

/// Mbar_k of f = c * e^{-|m|}/Z on the plane (Z = 2 pi), numerically.
double exponential_tail_mbar(int k, double c);
/// Mbar_{2r} of f = exp(-(|m|^2/c)^q) (unnormalized), numerically.
double stretched_gaussian_mbar2r(int r, double c, double q);

/// CSV export, columns a,b,value (one row per table entry).
void write_moment_csv(const MomentTable& m, const std::string& path);

}  // namespace polykin
