#pragma once

#include "nmsub/manifold.hpp"

#include <string>
#include <vector>

namespace nmsub {

/// Predicted cluster assignments, labels in [0, l).
struct Partition {
  std::vector<int> assignments;
  int l = 0;

  static Partition fromAssignments(std::vector<int> a);
  void validate() const;
};

struct ClusterScores {
  double homogeneity = 0.0;
  double completeness = 0.0;
  double v_measure = 0.0;
};

/// Entropy-based homogeneity/completeness and their harmonic mean.
/// Conventions: H(truth) = 0 gives h = 1, H(pred) = 0 gives c = 1,
/// h = c = 0 gives v = 0.
ClusterScores homogeneityCompletenessV(const Partition& pred, const Partition& truth);

/// Pair-counting adjusted Rand index (expected-index corrected), in [-0.5, 1].
double adjustedRandIndex(const Partition& pred, const Partition& truth);

/// Cost table feeding performance profiles; infinity marks a failed run.
struct ProfileTable {
  std::vector<std::string> solvers;
  std::vector<std::string> problems;
  Matrix costs;  // solvers x problems

  void validate() const;
};

/// Per-solver cumulative distribution of cost ratios r = cost / best cost.
/// Problems where every solver failed are dropped.
struct ProfileCurve {
  std::vector<std::string> solvers;
  std::vector<double> taus;  // breakpoints, ascending, starting at 1
  Matrix rho;                // taus x solvers
};

ProfileCurve performanceProfile(const ProfileTable& table);

/// Delimited text: tau column followed by one rho column per solver.
std::string formatProfile(const ProfileCurve& curve);

}  // namespace nmsub
