#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace polykin {

struct SelftestCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct SelftestResult {
  std::vector<SelftestCheck> checks;
  bool passed() const;
  std::string summary() const;  ///< one line per check plus a verdict
};

/// Built-in verification battery over all solver modules; deterministic for
/// a fixed seed. kramer_scale != 1 is a sensitivity hook: it perturbs the
/// stress-integrand constant used by the comparison and must make the
/// kramer_stress check fail.
SelftestResult selftest(std::uint64_t seed = 1, double kramer_scale = 1.0);

/// Moment-toolkit battery: transfer identities, positivity, norm
/// equivalence, closed-form fixtures.
SelftestResult moments_selftest(std::uint64_t seed = 1);

}  // namespace polykin
