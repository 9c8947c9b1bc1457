#pragma once

#include "nmsub/dataset.hpp"
#include "nmsub/manifold.hpp"

#include <memory>
#include <vector>

namespace nmsub {

/// Objective value together with an ambient-space subgradient. The solver
/// projects the subgradient onto the tangent space; oracles never do.
struct Evaluation {
  double value = 0.0;
  Blocks subgradient;
};

/// Value-plus-subgradient oracle over blocks on a fixed domain manifold.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual const Manifold& domain() const = 0;
  virtual double value(const Blocks& x) const = 0;
  virtual Evaluation evaluate(const Blocks& x) const = 0;
};

enum class Dissimilarity { SquaredEuclidean, Cosine, StiefelTrace, GrassmannProjector };

/// d(x, y) and its ambient gradient in x for a single pair.
double dissimilarity(Dissimilarity kind, const Matrix& x, const Matrix& y);
Matrix dissimilarityGradient(Dissimilarity kind, const Matrix& x, const Matrix& y);

/// Throws InvalidInput unless the dissimilarity matches the point manifold.
void checkCompatible(Dissimilarity kind, const Manifold& point_manifold);

/// Sum-of-minimal-dissimilarities clustering objective
///   phi(X) = (1/n) sum_j min_t d(x_t, y_j),
/// covering minimum sum-of-squares clustering (SquaredEuclidean on R^s) and
/// the sphere/Stiefel/Grassmann variants. Argmin ties break to the lowest
/// center index; the subgradient sums the gradient of each point's assigned
/// term only.
class ClusteringObjective : public Objective {
 public:
  ClusteringObjective(const LabeledDataset& data, int num_centers, Dissimilarity kind);

  const Manifold& domain() const override { return domain_; }
  double value(const Blocks& centers) const override;
  Evaluation evaluate(const Blocks& centers) const override;

  /// Lowest-index argmin assignment of every data point.
  std::vector<int> assign(const Blocks& centers) const;

  /// Smallest gap between a point's best and second-best center; infinite for
  /// a single center. Finite-difference tests need this strictly positive.
  double assignmentMargin(const Blocks& centers) const;

  int numCenters() const { return num_centers_; }
  Dissimilarity kind() const { return kind_; }
  const LabeledDataset& data() const { return data_; }

 private:
  /// l-by-n matrix of d(x_t, y_j).
  Matrix dissimilarityTable(const Blocks& centers) const;

  const LabeledDataset& data_;
  int num_centers_;
  Dissimilarity kind_;
  Manifold domain_;
};

/// Weighted least-squares multidimensional scaling
///   phi(X) = sum_{i<j} w_ij (||x_i - x_j|| - delta_ij)^2
/// with the subgradient choice 0 for a pair at x_i = x_j.
class MdsObjective : public Objective {
 public:
  /// weights: empty matrix means all-ones.
  MdsObjective(Matrix delta, Index embed_dim, Matrix weights = Matrix());

  const Manifold& domain() const override { return domain_; }
  double value(const Blocks& x) const override;
  Evaluation evaluate(const Blocks& x) const override;

  Index pointCount() const { return delta_.rows(); }
  Index embedDim() const { return embed_dim_; }
  const Matrix& delta() const { return delta_; }
  const Matrix& weights() const { return weights_; }

 private:
  Matrix delta_, weights_;
  Index embed_dim_;
  Manifold domain_;
};

/// One evaluation of a difference-of-convex split phi = g - h + offset.
struct DcEvaluation {
  double g_value = 0.0;
  Blocks g_gradient;
  double h_value = 0.0;
  Blocks h_subgradient;
};

/// DC structure consumed by the DCA/BDCA baselines: smooth strongly convex g,
/// convex h with a computable subgradient, and a closed-form minimizer of the
/// linearized subproblem g(x) - <y, x>.
class DcProgram {
 public:
  virtual ~DcProgram() = default;
  virtual const Objective& objective() const = 0;
  virtual DcEvaluation evaluateDc(const Blocks& x) const = 0;
  /// Additive constant making g - h + offset equal to the primal objective.
  virtual double offset() const { return 0.0; }
  /// argmin_x g(x) - <y, x>; throws on a singular subproblem.
  virtual Blocks argminLinearized(const Blocks& y) const = 0;
};

/// DC split of the clustering objective:
///   g = (1/n) sum_i sum_j ||x_j - y_i||^2 + (rho/2) ||X||^2
///   h = (1/n) sum_i max_j sum_{t != j} ||x_t - y_i||^2 + (rho/2) ||X||^2
/// with g - h equal to the clustering objective exactly.
class MsscDcProgram : public DcProgram {
 public:
  MsscDcProgram(const LabeledDataset& data, int num_centers, double rho);

  const Objective& objective() const override { return phi_; }
  DcEvaluation evaluateDc(const Blocks& x) const override;
  Blocks argminLinearized(const Blocks& y) const override;
  double rho() const { return rho_; }

 private:
  ClusteringObjective phi_;
  double rho_;
  Vector data_mean_;
};

/// DC split of the scaled MDS objective. Expanding (d - delta)^2 gives
///   phi = g0 - h0 + sum_{i<j} w_ij delta_ij^2,
/// with g0 = sum w_ij d_ij^2 and h0 = 2 sum w_ij delta_ij d_ij; rho/2 ||X||^2
/// is added to both parts.
class MdsDcProgram : public DcProgram {
 public:
  MdsDcProgram(Matrix delta, Index embed_dim, double rho, Matrix weights = Matrix());

  const Objective& objective() const override { return phi_; }
  DcEvaluation evaluateDc(const Blocks& x) const override;
  double offset() const override { return offset_; }
  Blocks argminLinearized(const Blocks& y) const override;
  double rho() const { return rho_; }

 private:
  MdsObjective phi_;
  double rho_;
  double offset_;
  Eigen::LLT<Matrix> subproblem_llt_;  // factorization of 2(D - W) + rho I
};

}  // namespace nmsub
