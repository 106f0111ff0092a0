#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace polykin {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolverKind { Kinetic, Hierarchy, OldroydB, Both };
enum class InitialU { Zero, TaylorGreen };
enum class InitialF { Equilibrium, StretchedGaussian, ExponentialTail };
enum class ClosureKind { ExactHookean, ZeroTruncation, EquilibriumFactorization };

/// Flat key=value configuration ('#' comments). Unknown keys, missing
/// required keys and invariant violations raise ConfigError with the key
/// name and line number.
struct SimConfig {
  // Physical constants (all positive, q >= 1).
  double nu1 = 1.0;
  double nu2 = 1.0;
  double epsilon = 1.0;
  double K = 1.0;
  double q = 1.0;

  // Discretization.
  int nx = 32;            // x-grid per axis (power of two)
  int nm = 64;            // m-grid per axis (power of two)
  double lm = 6.0;        // configuration box half-width
  double alpha = 0.0;     // cutoff scale; 0 = default lm/2

  // Time stepping.
  bool dt_auto = true;
  double dt = 0.0;        // used when dt_auto is false
  double T = 1.0;

  SolverKind solver = SolverKind::Kinetic;
  ClosureKind closure = ClosureKind::ExactHookean;
  int hierarchy_degree = 2;

  InitialU initial_u = InitialU::TaylorGreen;
  double taylor_green_amplitude = 0.5;
  InitialF initial_f = InitialF::Equilibrium;
  double stretch_c = 2.0;  // stretched-Gaussian scale
  double tail_c = 1.0;     // exponential-tail amplitude

  double sample_interval = 0.05;
  double snapshot_interval = 0.0;  // 0 = final snapshot only
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  bool quiet = false;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 0.5 * lm; }

  /// Canonical serialization (sorted keys); basis of the config hash.
  std::string canonical() const;
  std::uint64_t hash() const;

  void validate() const;  ///< throws ConfigError naming the offending keys
};

SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text, const std::string& origin = "<string>");

const char* to_string(SolverKind k);
const char* to_string(InitialU k);
const char* to_string(InitialF k);
const char* to_string(ClosureKind k);

}  // namespace polykin
