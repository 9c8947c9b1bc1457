#include "nmsub/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace nmsub::geometry {

namespace {

Matrix symmetrize(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// (I + G)^(-1/2) for symmetric positive definite I + G, via eigendecomposition
// of the small p-by-p Gram matrix.
Matrix inverseSqrt(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

// Thin QR factor with positive diagonal of R, so the result is unique and
// reduces to X when X already has orthonormal columns.
Matrix qrOrthonormalize(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix r = qr.matrixQR().topLeftCorner(a.cols(), a.cols());
  for (Index j = 0; j < a.cols(); ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

Matrix projectBlock(const Manifold& m, const Matrix& x, const Matrix& v) {
  switch (m.kind()) {
    case Manifold::Kind::Euclidean:
      return v;
    case Manifold::Kind::Sphere:
      return v - (x.col(0).dot(v.col(0))) * x;
    case Manifold::Kind::Stiefel:
    case Manifold::Kind::Grassmann:
      return v - x * symmetrize(x.transpose() * v);
    case Manifold::Kind::Product:
      break;
  }
  throw InvalidInput("projectBlock: unexpected product");
}

Matrix retractBlock(const Manifold& m, const Matrix& x, const Matrix& xi) {
  switch (m.kind()) {
    case Manifold::Kind::Euclidean:
      return x + xi;
    case Manifold::Kind::Sphere: {
      const Matrix y = x + xi;
      return y / y.norm();
    }
    case Manifold::Kind::Stiefel:
    case Manifold::Kind::Grassmann: {
      const Matrix y = x + xi;
      if (m.stiefelRetraction() == StiefelRetraction::Qr) return qrOrthonormalize(y);
      // Polar retraction (X + xi) (I + xi^T xi)^(-1/2); for tangent xi the
      // Gram matrix of X + xi is exactly I + xi^T xi.
      return y * inverseSqrt(Matrix::Identity(m.cols(), m.cols()) + xi.transpose() * xi);
    }
    case Manifold::Kind::Product:
      break;
  }
  throw InvalidInput("retractBlock: unexpected product");
}

double membershipBlock(const Manifold& m, const Matrix& x) {
  switch (m.kind()) {
    case Manifold::Kind::Euclidean:
      return x.allFinite() ? 0.0 : std::numeric_limits<double>::infinity();
    case Manifold::Kind::Sphere:
      return std::abs(x.norm() - 1.0);
    case Manifold::Kind::Stiefel:
    case Manifold::Kind::Grassmann:
      return (x.transpose() * x - Matrix::Identity(m.cols(), m.cols())).norm();
    case Manifold::Kind::Product:
      break;
  }
  throw InvalidInput("membershipBlock: unexpected product");
}

double tangencyBlock(const Manifold& m, const Matrix& x, const Matrix& xi) {
  switch (m.kind()) {
    case Manifold::Kind::Euclidean:
      return 0.0;
    case Manifold::Kind::Sphere:
      return std::abs(x.col(0).dot(xi.col(0)));
    case Manifold::Kind::Stiefel:
    case Manifold::Kind::Grassmann:
      return (x.transpose() * xi + xi.transpose() * x).norm();
    case Manifold::Kind::Product:
      break;
  }
  throw InvalidInput("tangencyBlock: unexpected product");
}

Matrix randomBlock(const Manifold& m, Rng& rng) {
  switch (m.kind()) {
    case Manifold::Kind::Euclidean:
      return rng.gaussian(m.rows(), m.cols());
    case Manifold::Kind::Sphere: {
      for (;;) {
        Matrix g = rng.gaussian(m.rows(), 1);
        const double n = g.norm();
        if (n > 1e-12) return g / n;
      }
    }
    case Manifold::Kind::Stiefel:
    case Manifold::Kind::Grassmann:
      return qrOrthonormalize(rng.gaussian(m.rows(), m.cols()));
    case Manifold::Kind::Product:
      break;
  }
  throw InvalidInput("randomBlock: unexpected product");
}

}  // namespace

void checkShapes(const Manifold& m, const Blocks& v, const char* what) {
  if (static_cast<Index>(v.size()) != m.blockCount())
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(m.blockCount()) +
                       " blocks, got " + std::to_string(v.size()));
  for (Index i = 0; i < m.blockCount(); ++i) {
    const Manifold& b = m.block(i);
    const Matrix& mat = v[static_cast<std::size_t>(i)];
    if (mat.rows() != b.rows() || mat.cols() != b.cols())
      throw InvalidInput(std::string(what) + ": block " + std::to_string(i) + " has shape " +
                         std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()) +
                         ", expected " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

Blocks tangentProject(const Manifold& m, const Blocks& x, const Blocks& v) {
  checkShapes(m, x, "tangentProject(point)");
  checkShapes(m, v, "tangentProject(vector)");
  Blocks out(v.size());
  for (Index i = 0; i < m.blockCount(); ++i)
    out[i] = projectBlock(m.block(i), x[i], v[i]);
  return out;
}

Blocks retract(const Manifold& m, const Blocks& x, const Blocks& xi) {
  checkShapes(m, x, "retract(point)");
  checkShapes(m, xi, "retract(tangent)");
  Blocks out(x.size());
  for (Index i = 0; i < m.blockCount(); ++i)
    out[i] = retractBlock(m.block(i), x[i], xi[i]);
  return out;
}

double membershipResidual(const Manifold& m, const Blocks& x) {
  checkShapes(m, x, "membershipResidual");
  double worst = 0.0;
  for (Index i = 0; i < m.blockCount(); ++i)
    worst = std::max(worst, membershipBlock(m.block(i), x[i]));
  return worst;
}

double tangencyResidual(const Manifold& m, const Blocks& x, const Blocks& xi) {
  checkShapes(m, x, "tangencyResidual(point)");
  checkShapes(m, xi, "tangencyResidual(tangent)");
  double worst = 0.0;
  for (Index i = 0; i < m.blockCount(); ++i)
    worst = std::max(worst, tangencyBlock(m.block(i), x[i], xi[i]));
  return worst;
}

Blocks randomPoint(const Manifold& m, Rng& rng) {
  Blocks out(static_cast<std::size_t>(m.blockCount()));
  for (Index i = 0; i < m.blockCount(); ++i) out[i] = randomBlock(m.block(i), rng);
  return out;
}

Blocks randomTangent(const Manifold& m, const Blocks& x, Rng& rng) {
  Blocks g(static_cast<std::size_t>(m.blockCount()));
  for (Index i = 0; i < m.blockCount(); ++i)
    g[i] = rng.gaussian(m.block(i).rows(), m.block(i).cols());
  return tangentProject(m, x, g);
}

}  // namespace nmsub::geometry
