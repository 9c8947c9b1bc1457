#include "nmsub/synthgen.hpp"

#include "nmsub/geometry.hpp"

#include <cmath>

namespace nmsub {

namespace {

void checkPositive(bool ok, const char* what) {
  if (!ok) throw InvalidInput(std::string("generator spec: ") + what);
}

}  // namespace

LabeledDataset genGaussianClusters(const GaussianClustersSpec& spec, Rng& rng) {
  checkPositive(spec.l >= 1 && spec.n_per >= 1 && spec.dim >= 1, "counts must be positive");
  checkPositive(spec.center_std >= 0.0 && spec.point_std >= 0.0,
                "standard deviations must be nonnegative");
  LabeledDataset data;
  data.name = "gaussian-clusters";
  data.point_manifold = Manifold::euclidean(spec.dim);
  Matrix centers = spec.center_std * rng.gaussian(spec.dim, spec.l);
  for (int t = 0; t < spec.l; ++t)
    for (int i = 0; i < spec.n_per; ++i) {
      data.points.push_back(centers.col(t) + spec.point_std * rng.gaussian(spec.dim, 1));
      data.labels.push_back(t);
    }
  return data;
}

Vector sampleVmf(const Vector& mu, double kappa, Rng& rng) {
  const Index dim = mu.size();
  if (kappa <= 0.0) throw InvalidInput("vmf: kappa must be positive");
  if (dim < 2) throw InvalidInput("vmf: ambient dimension must be >= 2");

  // Wood's rejection sampler for the cosine w = <x, mu>.
  const double dm1 = static_cast<double>(dim - 1);
  const double b = (-2.0 * kappa + std::sqrt(4.0 * kappa * kappa + dm1 * dm1)) / dm1;
  const double x0 = (1.0 - b) / (1.0 + b);
  const double c = kappa * x0 + dm1 * std::log(1.0 - x0 * x0);
  double w;
  for (;;) {
    const double z = rng.beta(0.5 * dm1, 0.5 * dm1);
    w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
    const double u = rng.uniform();
    if (kappa * w + dm1 * std::log(1.0 - x0 * w) - c >= std::log(u > 0 ? u : 0x1.0p-53))
      break;
  }

  // Tangent-normal composition: uniform direction orthogonal to mu.
  Vector v;
  for (;;) {
    v = rng.gaussian(dim, 1);
    v -= v.dot(mu) * mu;
    const double n = v.norm();
    if (n > 1e-12) {
      v /= n;
      break;
    }
  }
  Vector x = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
  return x / x.norm();
}

LabeledDataset genVmfClusters(const VmfClustersSpec& spec, Rng& rng) {
  checkPositive(spec.l >= 1 && spec.n_per >= 1 && spec.ambient_dim >= 2,
                "counts must be positive, ambient_dim >= 2");
  checkPositive(spec.kappa > 0.0, "kappa must be positive");
  LabeledDataset data;
  data.name = "vmf-clusters";
  data.point_manifold = Manifold::sphere(spec.ambient_dim);
  std::vector<Vector> means;
  for (int t = 0; t < spec.l; ++t) {
    Blocks mu = geometry::randomPoint(data.point_manifold, rng);
    means.push_back(mu.front().col(0));
  }
  for (int t = 0; t < spec.l; ++t)
    for (int i = 0; i < spec.n_per; ++i) {
      data.points.push_back(sampleVmf(means[static_cast<std::size_t>(t)], spec.kappa, rng));
      data.labels.push_back(t);
    }
  return data;
}

Matrix orthogonalFromAngles(int n, const std::vector<double>& angles) {
  const std::size_t expected = static_cast<std::size_t>(n) * (n - 1) / 2;
  if (angles.size() != expected)
    throw InvalidInput("orthogonalFromAngles: expected n(n-1)/2 angles");
  Matrix o = Matrix::Identity(n, n);
  std::size_t idx = 0;
  for (int k = 1; k <= n - 1; ++k)
    for (int j = k; j <= n - 1; ++j) {
      // Right-multiply by the plane rotation acting on coordinates (j, j+1),
      // which only touches two columns of the running product.
      const double th = angles[idx++];
      const double cs = std::cos(th);
      const double sn = std::sin(th);
      const Vector a = o.col(j - 1);
      const Vector b = o.col(j);
      o.col(j - 1) = cs * a + sn * b;
      o.col(j) = -sn * a + cs * b;
    }
  return o;
}

LabeledDataset genFrameClusters(const FrameClustersSpec& spec, Rng& rng) {
  checkPositive(spec.n >= 1 && spec.p >= 1 && spec.l >= 1 && spec.n_per >= 1,
                "counts must be positive");
  checkPositive(spec.n >= spec.p, "requires n >= p");
  checkPositive(spec.noise_halfwidth >= 0.0, "noise halfwidth must be nonnegative");

  LabeledDataset data;
  data.name = spec.grassmann_target ? "grassmann-frame-clusters" : "stiefel-frame-clusters";
  data.point_manifold = spec.grassmann_target ? Manifold::grassmann(spec.n, spec.p)
                                              : Manifold::stiefel(spec.n, spec.p);
  const std::size_t na = static_cast<std::size_t>(spec.n) * (spec.n - 1) / 2;
  const double two_pi = 2.0 * std::acos(-1.0);

  std::vector<std::vector<double>> base(static_cast<std::size_t>(spec.l));
  for (auto& angles : base) {
    angles.resize(na);
    for (double& a : angles) a = rng.uniform(0.0, two_pi);
  }
  std::vector<double> perturbed(na);
  for (int t = 0; t < spec.l; ++t)
    for (int i = 0; i < spec.n_per; ++i) {
      for (std::size_t a = 0; a < na; ++a)
        perturbed[a] = base[static_cast<std::size_t>(t)][a] +
                       rng.uniform(-spec.noise_halfwidth, spec.noise_halfwidth);
      data.points.push_back(
          orthogonalFromAngles(spec.n, perturbed).leftCols(spec.p).eval());
      data.labels.push_back(t);
    }
  return data;
}

MdsInstance genMdsInstance(const MdsRandomSpec& spec, Rng& rng) {
  checkPositive(spec.n >= 2 && spec.source_dim >= 1 && spec.embed_dim >= 1,
                "counts must be positive, n >= 2");
  checkPositive(spec.source_dim >= spec.embed_dim, "requires source_dim >= embed_dim");
  MdsInstance inst;
  inst.embed_dim = spec.embed_dim;
  inst.source_points = rng.gaussian(spec.source_dim, spec.n);
  inst.delta = Matrix::Zero(spec.n, spec.n);
  for (int i = 0; i < spec.n; ++i)
    for (int j = i + 1; j < spec.n; ++j) {
      const double d = (inst.source_points.col(i) - inst.source_points.col(j)).norm();
      inst.delta(i, j) = d;
      inst.delta(j, i) = d;
    }
  return inst;
}

}  // namespace nmsub
