#pragma once

#include "nmsub/dataset.hpp"
#include "nmsub/rng.hpp"

namespace nmsub {

struct GaussianClustersSpec {
  int l = 5;
  int n_per = 100;
  int dim = 2;
  double center_std = 10.0;
  double point_std = 1.0;
};

struct VmfClustersSpec {
  int l = 5;
  int n_per = 100;
  int ambient_dim = 3;
  double kappa = 10.0;
};

struct FrameClustersSpec {
  int n = 10;
  int p = 5;
  int l = 5;
  int n_per = 100;
  double noise_halfwidth = 0.3490658503988659;  // pi/9
  bool grassmann_target = false;
};

struct MdsRandomSpec {
  int n = 50;
  int source_dim = 10;
  int embed_dim = 2;
};

/// Cluster centers from N(0, center_std^2 I), points from N(center,
/// point_std^2 I); labels record the generating cluster.
LabeledDataset genGaussianClusters(const GaussianClustersSpec& spec, Rng& rng);

/// Mean directions uniform on the sphere; each cluster drawn from the von
/// Mises-Fisher distribution with the given concentration (rejection sampler
/// with tangent-normal composition).
LabeledDataset genVmfClusters(const VmfClustersSpec& spec, Rng& rng);

/// Samples a single vMF(mu, kappa) point (exposed for the estimator tests).
Vector sampleVmf(const Vector& mu, double kappa, Rng& rng);

/// Per cluster a base set of n(n-1)/2 rotation angles uniform on [0, 2pi);
/// each data point perturbs every angle by Uniform(-noise, +noise), builds
/// the product of Givens-type plane rotations and keeps the first p columns
/// as a Stiefel representative.
LabeledDataset genFrameClusters(const FrameClustersSpec& spec, Rng& rng);

/// The ordered Givens product O = prod_{k=1..n-1} prod_{j=k..n-1} O_n^j(theta_{k,j}).
Matrix orthogonalFromAngles(int n, const std::vector<double>& angles);

struct MdsInstance {
  Matrix delta;          // exact pairwise distances of the source points
  Matrix source_points;  // source_dim x n
  int embed_dim = 2;
};

/// Random normal source points with their exact Euclidean distance matrix.
MdsInstance genMdsInstance(const MdsRandomSpec& spec, Rng& rng);

}  // namespace nmsub
