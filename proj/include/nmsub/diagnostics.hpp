#pragma once

#include <string>
#include <vector>

namespace nmsub {

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  std::string detail;
};

/// Corruption hooks for verifying that the battery actually detects faults.
enum class FaultInjection { None, FlipSubgradientSign };

/// Deterministic invariant battery: retraction axioms, tangent projections,
/// finite-difference oracle checks, DC identities, metric sanity and a canned
/// solver run with its reference-value guarantees.
std::vector<CheckResult> runInvariantBattery(FaultInjection fault = FaultInjection::None);

}  // namespace nmsub
