#pragma once

#include "nmsub/dataset.hpp"

#include <vector>

namespace nmsub {

struct SphericalKmeansResult {
  Blocks centers;
  std::vector<int> assignments;
  double objective = 0.0;  // mean cosine dissimilarity to the assigned center
  int iterations = 0;
  bool converged = false;
  double wall_time_s = 0.0;
};

/// Alternating assignment/mean-direction updates for unit-norm data. Points
/// tie-break to the lowest center index; an empty cluster is reseeded to the
/// point farthest from its current center.
SphericalKmeansResult sphericalKmeans(const LabeledDataset& data, int num_centers,
                                      const Blocks& x0, int max_iter, double epsilon);

}  // namespace nmsub
