#include "nmsub/kmeans.hpp"

#include "nmsub/geometry.hpp"

#include <chrono>
#include <cmath>

namespace nmsub {

SphericalKmeansResult sphericalKmeans(const LabeledDataset& data, int num_centers,
                                      const Blocks& x0, int max_iter, double epsilon) {
  if (data.point_manifold.kind() != Manifold::Kind::Sphere)
    throw InvalidInput("spherical k-means requires unit-norm data on a sphere");
  if (num_centers < 1 || static_cast<int>(x0.size()) != num_centers)
    throw InvalidInput("spherical k-means: center count mismatch");
  const auto t_start = std::chrono::steady_clock::now();

  const Matrix& y = data.stacked();  // dim x n
  const Index n = y.cols();
  const Index l = num_centers;
  Matrix centers(y.rows(), l);
  for (Index t = 0; t < l; ++t) centers.col(t) = x0[static_cast<std::size_t>(t)].col(0);

  SphericalKmeansResult result;
  result.assignments.assign(static_cast<std::size_t>(n), -1);
  double prev_objective = std::numeric_limits<double>::infinity();

  for (int it = 0; it < max_iter; ++it) {
    result.iterations = it + 1;
    const Matrix cos = centers.transpose() * y;  // l x n

    bool changed = false;
    double objective = 0.0;
    for (Index j = 0; j < n; ++j) {
      Index t = 0;
      const double best = cos.col(j).maxCoeff(&t);  // first maximum on ties
      objective += 1.0 - best;
      if (result.assignments[static_cast<std::size_t>(j)] != static_cast<int>(t)) {
        result.assignments[static_cast<std::size_t>(j)] = static_cast<int>(t);
        changed = true;
      }
    }
    objective /= static_cast<double>(n);
    result.objective = objective;

    if (!changed ||
        std::abs(objective - prev_objective) / std::max(std::abs(prev_objective), 1.0) <=
            epsilon) {
      result.converged = true;
      break;
    }
    prev_objective = objective;

    for (Index t = 0; t < l; ++t) {
      Vector sum = Vector::Zero(y.rows());
      int count = 0;
      for (Index j = 0; j < n; ++j)
        if (result.assignments[static_cast<std::size_t>(j)] == static_cast<int>(t)) {
          sum += y.col(j);
          ++count;
        }
      const double norm = sum.norm();
      if (count == 0 || norm <= 1e-14) {
        // Reseed to the point with the largest dissimilarity to its center.
        Index worst = 0;
        double worst_d = -1.0;
        for (Index j = 0; j < n; ++j) {
          const int a = result.assignments[static_cast<std::size_t>(j)];
          const double d = 1.0 - centers.col(a).dot(y.col(j));
          if (d > worst_d) {
            worst_d = d;
            worst = j;
          }
        }
        centers.col(t) = y.col(worst);
      } else {
        centers.col(t) = sum / norm;
      }
    }
  }

  result.centers.reserve(static_cast<std::size_t>(l));
  for (Index t = 0; t < l; ++t) result.centers.push_back(centers.col(t));
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

}  // namespace nmsub
