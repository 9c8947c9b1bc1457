#include "nmsub/objectives.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace nmsub {

namespace {

Matrix stackColumns(const Blocks& x) {
  Matrix s(x.front().size(), static_cast<Index>(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j)
    s.col(static_cast<Index>(j)) = Eigen::Map<const Vector>(x[j].data(), x[j].size());
  return s;
}

}  // namespace

double dissimilarity(Dissimilarity kind, const Matrix& x, const Matrix& y) {
  switch (kind) {
    case Dissimilarity::SquaredEuclidean:
      return (x - y).squaredNorm();
    case Dissimilarity::Cosine:
      return 1.0 - x.col(0).dot(y.col(0));
    case Dissimilarity::StiefelTrace:
      return static_cast<double>(x.cols()) - (x.array() * y.array()).sum();
    case Dissimilarity::GrassmannProjector:
      return static_cast<double>(x.cols()) - (x.transpose() * y).squaredNorm();
  }
  throw InvalidInput("dissimilarity: unknown kind");
}

Matrix dissimilarityGradient(Dissimilarity kind, const Matrix& x, const Matrix& y) {
  switch (kind) {
    case Dissimilarity::SquaredEuclidean:
      return 2.0 * (x - y);
    case Dissimilarity::Cosine:
    case Dissimilarity::StiefelTrace:
      return -y;
    case Dissimilarity::GrassmannProjector:
      return -2.0 * y * (y.transpose() * x);
  }
  throw InvalidInput("dissimilarityGradient: unknown kind");
}

void checkCompatible(Dissimilarity kind, const Manifold& point_manifold) {
  const auto k = point_manifold.kind();
  const bool ok = (kind == Dissimilarity::SquaredEuclidean && k == Manifold::Kind::Euclidean) ||
                  (kind == Dissimilarity::Cosine && k == Manifold::Kind::Sphere) ||
                  (kind == Dissimilarity::StiefelTrace && k == Manifold::Kind::Stiefel) ||
                  (kind == Dissimilarity::GrassmannProjector && k == Manifold::Kind::Grassmann);
  if (!ok)
    throw InvalidInput("dissimilarity is incompatible with data on " + point_manifold.describe());
}

ClusteringObjective::ClusteringObjective(const LabeledDataset& data, int num_centers,
                                         Dissimilarity kind)
    : data_(data),
      num_centers_(num_centers),
      kind_(kind),
      domain_(Manifold::power(data.point_manifold, num_centers)) {
  if (data.size() == 0) throw InvalidInput("clustering objective: empty dataset");
  checkCompatible(kind, data.point_manifold);
}

Matrix ClusteringObjective::dissimilarityTable(const Blocks& centers) const {
  const Index l = num_centers_;
  const Index n = data_.size();
  Matrix table(l, n);
  switch (kind_) {
    case Dissimilarity::SquaredEuclidean: {
      const Matrix& s = data_.stacked();
      const Matrix c = stackColumns(centers);
      const Vector cn = c.colwise().squaredNorm();
      const Vector yn = s.colwise().squaredNorm();
      table.noalias() = -2.0 * (c.transpose() * s);
      table.colwise() += cn;
      table.rowwise() += yn.transpose();
      table = table.cwiseMax(0.0);
      break;
    }
    case Dissimilarity::Cosine:
    case Dissimilarity::StiefelTrace: {
      // tr(X^T Y) = vec(X) . vec(Y), so both reduce to one inner-product GEMM.
      const Matrix& s = data_.stacked();
      const Matrix c = stackColumns(centers);
      const double shift =
          kind_ == Dissimilarity::Cosine ? 1.0 : static_cast<double>(centers.front().cols());
      table.noalias() = -(c.transpose() * s);
      table.array() += shift;
      break;
    }
    case Dissimilarity::GrassmannProjector: {
      const Index p = centers.front().cols();
      for (Index t = 0; t < l; ++t)
        for (Index j = 0; j < n; ++j)
          table(t, j) = static_cast<double>(p) -
                        (centers[static_cast<std::size_t>(t)].transpose() *
                         data_.points[static_cast<std::size_t>(j)])
                            .squaredNorm();
      break;
    }
  }
  return table;
}

double ClusteringObjective::value(const Blocks& centers) const {
  const Matrix table = dissimilarityTable(centers);
  double total = 0.0;
  for (Index j = 0; j < table.cols(); ++j) total += table.col(j).minCoeff();
  return total / static_cast<double>(table.cols());
}

std::vector<int> ClusteringObjective::assign(const Blocks& centers) const {
  const Matrix table = dissimilarityTable(centers);
  std::vector<int> a(static_cast<std::size_t>(table.cols()));
  for (Index j = 0; j < table.cols(); ++j) {
    Index t = 0;
    table.col(j).minCoeff(&t);  // first (lowest-index) minimum
    a[static_cast<std::size_t>(j)] = static_cast<int>(t);
  }
  return a;
}

double ClusteringObjective::assignmentMargin(const Blocks& centers) const {
  const Matrix table = dissimilarityTable(centers);
  if (table.rows() < 2) return std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < table.cols(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    for (Index t = 0; t < table.rows(); ++t) {
      const double d = table(t, j);
      if (d < best) {
        second = best;
        best = d;
      } else if (d < second) {
        second = d;
      }
    }
    margin = std::min(margin, second - best);
  }
  return margin;
}

Evaluation ClusteringObjective::evaluate(const Blocks& centers) const {
  const Matrix table = dissimilarityTable(centers);
  const Index l = num_centers_;
  const Index n = data_.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  Evaluation out;
  out.subgradient = blocks::zerosLike(centers);
  std::vector<int> counts(static_cast<std::size_t>(l), 0);
  Blocks assigned_sums;  // sum of data points per center, in point shape
  assigned_sums.reserve(static_cast<std::size_t>(l));
  for (Index t = 0; t < l; ++t)
    assigned_sums.push_back(Matrix::Zero(centers.front().rows(), centers.front().cols()));

  double total = 0.0;
  std::vector<Matrix> grassmann_acc;  // per-center sum of V V^T
  if (kind_ == Dissimilarity::GrassmannProjector)
    grassmann_acc.assign(static_cast<std::size_t>(l),
                         Matrix::Zero(centers.front().rows(), centers.front().rows()));

  for (Index j = 0; j < n; ++j) {
    Index t = 0;
    total += table.col(j).minCoeff(&t);
    const auto tu = static_cast<std::size_t>(t);
    counts[tu] += 1;
    const Matrix& y = data_.points[static_cast<std::size_t>(j)];
    if (kind_ == Dissimilarity::GrassmannProjector)
      grassmann_acc[tu].noalias() += y * y.transpose();
    else
      assigned_sums[tu] += y;
  }
  out.value = total / static_cast<double>(n);

  for (Index t = 0; t < l; ++t) {
    const auto tu = static_cast<std::size_t>(t);
    Matrix& g = out.subgradient[tu];
    switch (kind_) {
      case Dissimilarity::SquaredEuclidean:
        g = 2.0 * inv_n * (counts[tu] * centers[tu] - assigned_sums[tu]);
        break;
      case Dissimilarity::Cosine:
      case Dissimilarity::StiefelTrace:
        g = -inv_n * assigned_sums[tu];
        break;
      case Dissimilarity::GrassmannProjector:
        g = -2.0 * inv_n * (grassmann_acc[tu] * centers[tu]);
        break;
    }
  }
  return out;
}

MdsObjective::MdsObjective(Matrix delta, Index embed_dim, Matrix weights)
    : delta_(std::move(delta)),
      weights_(std::move(weights)),
      embed_dim_(embed_dim),
      domain_(Manifold::power(Manifold::euclidean(embed_dim),
                              static_cast<int>(delta_.rows()))) {
  const Index n = delta_.rows();
  if (n < 2 || delta_.cols() != n) throw InvalidInput("mds: delta must be square with n >= 2");
  if (embed_dim_ < 1) throw InvalidInput("mds: embedding dimension must be positive");
  if ((delta_ - delta_.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("mds: delta must be symmetric");
  if (delta_.minCoeff() < 0.0) throw InvalidInput("mds: delta must be nonnegative");
  if (delta_.diagonal().cwiseAbs().maxCoeff() > 1e-12)
    throw InvalidInput("mds: delta must have a zero diagonal");
  if (weights_.size() == 0) weights_ = Matrix::Ones(n, n);
  if (weights_.rows() != n || weights_.cols() != n)
    throw InvalidInput("mds: weight matrix shape mismatch");
  if ((weights_ - weights_.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("mds: weights must be symmetric");
  if (weights_.minCoeff() < 0.0) throw InvalidInput("mds: weights must be nonnegative");
  weights_.diagonal().setZero();
}

double MdsObjective::value(const Blocks& x) const {
  const Index n = pointCount();
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = (x[static_cast<std::size_t>(i)] - x[static_cast<std::size_t>(j)]).norm();
      const double r = d - delta_(i, j);
      total += weights_(i, j) * r * r;
    }
  return total;
}

Evaluation MdsObjective::evaluate(const Blocks& x) const {
  const Index n = pointCount();
  Evaluation out;
  out.subgradient = blocks::zerosLike(x);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const auto iu = static_cast<std::size_t>(i);
      const auto ju = static_cast<std::size_t>(j);
      const Matrix diff = x[iu] - x[ju];
      const double d = diff.norm();
      const double r = d - delta_(i, j);
      out.value += weights_(i, j) * r * r;
      if (d > 0.0) {
        // Smooth term: 2 w (d - delta) (x_i - x_j)/d, antisymmetric in (i, j);
        // at d = 0 the chosen subgradient contribution is 0.
        const Matrix g = (2.0 * weights_(i, j) * r / d) * diff;
        out.subgradient[iu] += g;
        out.subgradient[ju] -= g;
      }
    }
  return out;
}

MsscDcProgram::MsscDcProgram(const LabeledDataset& data, int num_centers, double rho)
    : phi_(data, num_centers, Dissimilarity::SquaredEuclidean), rho_(rho) {
  if (rho < 0.0) throw InvalidInput("mssc dc: rho must be >= 0");
  data_mean_ = data.stacked().rowwise().mean();
}

DcEvaluation MsscDcProgram::evaluateDc(const Blocks& x) const {
  const LabeledDataset& data = phi_.data();
  const Index n = data.size();
  const Index l = phi_.numCenters();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Matrix& s = data.stacked();

  DcEvaluation out;
  const double frob2 = blocks::squaredNorm(x);
  double center_sq = 0.0;
  Vector center_sum = Vector::Zero(s.rows());
  for (const Matrix& c : x) {
    center_sq += c.squaredNorm();
    center_sum += c.col(0);
  }
  const double data_sq = s.squaredNorm();

  // g = (1/n) sum_i sum_j ||x_j - y_i||^2 + rho/2 ||X||^2, expanded.
  out.g_value = static_cast<double>(n) * inv_n * center_sq -
                2.0 * inv_n * center_sum.dot(s.rowwise().sum()) +
                static_cast<double>(l) * inv_n * data_sq + 0.5 * rho_ * frob2;
  out.g_gradient.reserve(x.size());
  for (const Matrix& c : x)
    out.g_gradient.push_back(2.0 * (c.col(0) - data_mean_) + rho_ * c.col(0));

  // With T_i = sum_t ||x_t - y_i||^2, the inner max over j of sum_{t != j}
  // equals T_i - min_j ||x_j - y_i||^2, and the argmax is the argmin of the
  // clustering assignment (lowest index on ties).
  const std::vector<int> a = phi_.assign(x);
  double h0 = 0.0;
  Vector assigned_count = Vector::Zero(l);
  Matrix assigned_sum = Matrix::Zero(s.rows(), l);
  for (Index i = 0; i < n; ++i) {
    const Vector& y = s.col(i);
    double ti = 0.0;
    for (const Matrix& c : x) ti += (c.col(0) - y).squaredNorm();
    const auto ji = a[static_cast<std::size_t>(i)];
    h0 += ti - (x[static_cast<std::size_t>(ji)].col(0) - y).squaredNorm();
    assigned_count(ji) += 1.0;
    assigned_sum.col(ji) += y;
  }
  out.h_value = inv_n * h0 + 0.5 * rho_ * frob2;

  const Vector total_sum = s.rowwise().sum();
  out.h_subgradient.reserve(x.size());
  for (Index t = 0; t < l; ++t) {
    const Vector& c = x[static_cast<std::size_t>(t)].col(0);
    // Each data point i contributes 2(x_t - y_i) for every t != argmax(i).
    Vector g = 2.0 * inv_n *
               ((static_cast<double>(n) - assigned_count(t)) * c -
                (total_sum - assigned_sum.col(t)));
    g += rho_ * c;
    out.h_subgradient.push_back(g);
  }
  return out;
}

Blocks MsscDcProgram::argminLinearized(const Blocks& y) const {
  // grad g(x) = 2(x_j - mean) + rho x_j = y_j has the closed form below.
  Blocks x = blocks::zerosLike(y);
  for (std::size_t j = 0; j < y.size(); ++j)
    x[j] = (y[j].col(0) + 2.0 * data_mean_) / (2.0 + rho_);
  return x;
}

MdsDcProgram::MdsDcProgram(Matrix delta, Index embed_dim, double rho, Matrix weights)
    : phi_(std::move(delta), embed_dim, std::move(weights)), rho_(rho) {
  if (rho < 0.0) throw InvalidInput("mds dc: rho must be >= 0");
  const Matrix& w = phi_.weights();
  const Matrix& d = phi_.delta();
  offset_ = 0.0;
  for (Index i = 0; i < d.rows(); ++i)
    for (Index j = i + 1; j < d.cols(); ++j) offset_ += w(i, j) * d(i, j) * d(i, j);
  if (rho_ > 0.0) {
    Matrix a = -2.0 * w;
    a.diagonal() = 2.0 * w.rowwise().sum();
    a.diagonal().array() += rho_;
    subproblem_llt_.compute(a);
  }
}

DcEvaluation MdsDcProgram::evaluateDc(const Blocks& x) const {
  const Matrix& w = phi_.weights();
  const Matrix& delta = phi_.delta();
  const Index n = phi_.pointCount();
  DcEvaluation out;
  out.g_gradient = blocks::zerosLike(x);
  out.h_subgradient = blocks::zerosLike(x);
  const double frob2 = blocks::squaredNorm(x);
  out.g_value = 0.5 * rho_ * frob2;
  out.h_value = 0.5 * rho_ * frob2;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const auto iu = static_cast<std::size_t>(i);
      const auto ju = static_cast<std::size_t>(j);
      const Matrix diff = x[iu] - x[ju];
      const double d = diff.norm();
      out.g_value += w(i, j) * d * d;
      out.h_value += 2.0 * w(i, j) * delta(i, j) * d;
      const Matrix gg = 2.0 * w(i, j) * diff;
      out.g_gradient[iu] += gg;
      out.g_gradient[ju] -= gg;
      if (d > 0.0) {
        const Matrix gh = (2.0 * w(i, j) * delta(i, j) / d) * diff;
        out.h_subgradient[iu] += gh;
        out.h_subgradient[ju] -= gh;
      }
    }
  for (std::size_t i = 0; i < x.size(); ++i) {
    out.g_gradient[i] += rho_ * x[i];
    out.h_subgradient[i] += rho_ * x[i];
  }
  return out;
}

Blocks MdsDcProgram::argminLinearized(const Blocks& y) const {
  if (rho_ <= 0.0)
    throw std::runtime_error("mds dc subproblem is singular for rho = 0 (translations)");
  const Matrix ys = stackColumns(y);  // embed_dim x n
  const Matrix xs = subproblem_llt_.solve(ys.transpose()).transpose();
  Blocks out = blocks::zerosLike(y);
  for (Index i = 0; i < xs.cols(); ++i) out[static_cast<std::size_t>(i)] = xs.col(i);
  return out;
}

}  // namespace nmsub
