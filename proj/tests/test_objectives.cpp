#include "nmsub/objectives.hpp"

#include "nmsub/geometry.hpp"
#include "nmsub/synthgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace nmsub;

namespace {

LabeledDataset euclideanData(const std::vector<Vector>& pts) {
  LabeledDataset d;
  d.name = "test";
  d.point_manifold = Manifold::euclidean(pts.front().size());
  for (const Vector& p : pts) d.points.push_back(p);
  return d;
}

Vector scalar(double v) {
  Vector x(1);
  x(0) = v;
  return x;
}

// Central finite differences of phi restricted through the retraction.
double fdDirectional(const Objective& obj, const Blocks& x, const Blocks& dir, double h) {
  const Manifold& m = obj.domain();
  const double plus = obj.value(geometry::retract(m, x, blocks::scaled(dir, h)));
  const double minus = obj.value(geometry::retract(m, x, blocks::scaled(dir, -h)));
  return (plus - minus) / (2.0 * h);
}

}  // namespace

TEST_CASE("mssc single center single point") {
  const LabeledDataset data = euclideanData({scalar(3.0)});
  ClusteringObjective obj(data, 1, Dissimilarity::SquaredEuclidean);
  const Blocks x = {scalar(1.0)};
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(4.0));                    // ||x - y||^2
  CHECK(ev.subgradient.front()(0) == doctest::Approx(-4.0));  // 2(x - y)
}

TEST_CASE("mssc centers at the data points reach zero") {
  Rng rng(1);
  std::vector<Vector> pts;
  for (int i = 0; i < 4; ++i) pts.push_back(rng.gaussian(3, 1));
  const LabeledDataset data = euclideanData(pts);
  ClusteringObjective obj(data, 4, Dissimilarity::SquaredEuclidean);
  Blocks x;
  for (const Vector& p : pts) x.push_back(p);
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(0.0));
  CHECK(blocks::norm(ev.subgradient) == doctest::Approx(0.0));
}

TEST_CASE("mssc two centers hand example") {
  // Y = {0, 4} in R^1, centers {1, 3}: value (1 + 1)/2, subgradient (1, -1).
  const LabeledDataset data = euclideanData({scalar(0.0), scalar(4.0)});
  ClusteringObjective obj(data, 2, Dissimilarity::SquaredEuclidean);
  const Blocks x = {scalar(1.0), scalar(3.0)};
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(1.0));
  CHECK(ev.subgradient[0](0) == doctest::Approx(1.0));
  CHECK(ev.subgradient[1](0) == doctest::Approx(-1.0));

  // Brute force over all assignments confirms the min structure.
  double brute = std::numeric_limits<double>::infinity();
  for (int a0 = 0; a0 < 2; ++a0)
    for (int a1 = 0; a1 < 2; ++a1) {
      const double v = (std::pow(0.0 - (a0 ? 3.0 : 1.0), 2) +
                        std::pow(4.0 - (a1 ? 3.0 : 1.0), 2)) /
                       2.0;
      brute = std::min(brute, v);
    }
  CHECK(ev.value == doctest::Approx(brute));
}

TEST_CASE("mssc rejects empty datasets") {
  LabeledDataset data;
  data.point_manifold = Manifold::euclidean(2);
  CHECK_THROWS_AS(ClusteringObjective(data, 1, Dissimilarity::SquaredEuclidean), InvalidInput);
}

TEST_CASE("argmin ties break to the lowest center index") {
  const LabeledDataset data = euclideanData({scalar(0.0)});
  ClusteringObjective obj(data, 2, Dissimilarity::SquaredEuclidean);
  const Blocks x = {scalar(1.0), scalar(-1.0)};  // equidistant
  CHECK(obj.assign(x) == std::vector<int>{0});
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.subgradient[0](0) == doctest::Approx(2.0));  // assigned to center 0
  CHECK(ev.subgradient[1](0) == doctest::Approx(0.0));
}

TEST_CASE("permuting the dataset never changes the value") {
  Rng rng(2);
  GaussianClustersSpec spec;
  spec.l = 3;
  spec.n_per = 10;
  spec.dim = 2;
  LabeledDataset data = genGaussianClusters(spec, rng);
  ClusteringObjective obj(data, 3, Dissimilarity::SquaredEuclidean);
  const Blocks x = geometry::randomPoint(obj.domain(), rng);
  const double v = obj.value(x);

  LabeledDataset reversed = data;
  std::reverse(reversed.points.begin(), reversed.points.end());
  std::reverse(reversed.labels.begin(), reversed.labels.end());
  ClusteringObjective robj(reversed, 3, Dissimilarity::SquaredEuclidean);
  CHECK(robj.value(x) == doctest::Approx(v).epsilon(1e-12));
}

TEST_CASE("cosine dissimilarity examples") {
  CHECK(dissimilarity(Dissimilarity::Cosine, Vector::Unit(3, 0), Vector::Unit(3, 0)) ==
        doctest::Approx(0.0));

  LabeledDataset data;
  data.point_manifold = Manifold::sphere(3);
  data.points.push_back(Vector::Unit(3, 1));  // y = e2
  ClusteringObjective obj(data, 1, Dissimilarity::Cosine);
  const Blocks x = {Vector::Unit(3, 0).eval()};  // x = e1
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(1.0));
  CHECK((ev.subgradient.front() + Vector::Unit(3, 1)).norm() == doctest::Approx(0.0));
}

TEST_CASE("grassmann dissimilarity vanishes on equal subspaces") {
  Rng rng(3);
  const Manifold gr = Manifold::grassmann(6, 3);
  const Blocks u = geometry::randomPoint(gr, rng);
  CHECK(dissimilarity(Dissimilarity::GrassmannProjector, u.front(), u.front()) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Invariance under right-multiplication by an orthogonal Q.
  const Blocks q = geometry::randomPoint(Manifold::stiefel(3, 3), rng);
  const Matrix rotated = u.front() * q.front();
  const Blocks v = geometry::randomPoint(gr, rng);
  CHECK(dissimilarity(Dissimilarity::GrassmannProjector, u.front(), v.front()) ==
        doctest::Approx(dissimilarity(Dissimilarity::GrassmannProjector, rotated, v.front()))
            .epsilon(1e-12));
}

TEST_CASE("manifold cluster values are nonnegative and zero iff coincident") {
  Rng rng(4);
  FrameClustersSpec spec;
  spec.n = 6;
  spec.p = 2;
  spec.l = 2;
  spec.n_per = 5;
  LabeledDataset data = genFrameClusters(spec, rng);
  ClusteringObjective obj(data, 2, Dissimilarity::StiefelTrace);
  const Blocks x = geometry::randomPoint(obj.domain(), rng);
  CHECK(obj.value(x) >= 0.0);

  // Centers exactly covering every data point give value zero.
  FrameClustersSpec tight = spec;
  tight.noise_halfwidth = 0.0;
  tight.n_per = 3;
  Rng rng2(5);
  LabeledDataset atoms = genFrameClusters(tight, rng2);
  ClusteringObjective aobj(atoms, 2, Dissimilarity::StiefelTrace);
  const Blocks centers = {atoms.points[0], atoms.points[3]};
  CHECK(aobj.value(centers) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("stiefel oracle agrees with finite differences through the retraction") {
  Rng rng(6);
  FrameClustersSpec spec;
  spec.n = 8;
  spec.p = 3;
  spec.l = 1;
  spec.n_per = 1;
  LabeledDataset data = genFrameClusters(spec, rng);
  ClusteringObjective obj(data, 1, Dissimilarity::StiefelTrace);
  const Blocks x = geometry::randomPoint(obj.domain(), rng);
  const Evaluation ev = obj.evaluate(x);
  const Blocks w = geometry::tangentProject(obj.domain(), x, ev.subgradient);
  for (int t = 0; t < 5; ++t) {
    Blocks dir = geometry::randomTangent(obj.domain(), x, rng);
    dir = blocks::scaled(dir, 1.0 / blocks::norm(dir));
    const double fd = fdDirectional(obj, x, dir, 1e-6);
    CHECK(blocks::dot(w, dir) == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("finite differences validate every oracle at separated points") {
  Rng rng(7);
  const auto check_clustering = [&rng](const LabeledDataset& data, int l, Dissimilarity kind) {
    ClusteringObjective obj(data, l, kind);
    int tested = 0;
    while (tested < 50) {
      const Blocks x = geometry::randomPoint(obj.domain(), rng);
      if (obj.assignmentMargin(x) <= 1e-6) continue;
      ++tested;
      const Evaluation ev = obj.evaluate(x);
      const Blocks w = geometry::tangentProject(obj.domain(), x, ev.subgradient);
      Blocks dir = geometry::randomTangent(obj.domain(), x, rng);
      const double n = blocks::norm(dir);
      if (n == 0.0) continue;
      dir = blocks::scaled(dir, 1.0 / n);
      const double fd = fdDirectional(obj, x, dir, 1e-6);
      const double an = blocks::dot(w, dir);
      CHECK(std::abs(fd - an) / std::max(1.0, std::abs(fd)) <= 1e-4);
    }
  };

  GaussianClustersSpec gs;
  gs.l = 3;
  gs.n_per = 15;
  gs.dim = 3;
  check_clustering(genGaussianClusters(gs, rng), 3, Dissimilarity::SquaredEuclidean);

  VmfClustersSpec vs;
  vs.l = 2;
  vs.n_per = 15;
  vs.ambient_dim = 6;
  vs.kappa = 15.0;
  check_clustering(genVmfClusters(vs, rng), 2, Dissimilarity::Cosine);

  FrameClustersSpec fs;
  fs.n = 6;
  fs.p = 2;
  fs.l = 2;
  fs.n_per = 8;
  check_clustering(genFrameClusters(fs, rng), 2, Dissimilarity::StiefelTrace);
  fs.grassmann_target = true;
  check_clustering(genFrameClusters(fs, rng), 2, Dissimilarity::GrassmannProjector);
}

TEST_CASE("mds hand example in one dimension") {
  // x = (0, 1), delta_12 = 3: value (1-3)^2 = 4, gradient (4, -4).
  Matrix delta(2, 2);
  delta << 0, 3, 3, 0;
  MdsObjective obj(delta, 1);
  const Blocks x = {scalar(0.0), scalar(1.0)};
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(4.0));
  CHECK(ev.subgradient[0](0) == doctest::Approx(4.0));
  CHECK(ev.subgradient[1](0) == doctest::Approx(-4.0));

  // Central finite differences at 1e-6.
  Blocks dir = {scalar(1.0), scalar(0.0)};
  CHECK(fdDirectional(obj, x, dir, 1e-6) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("mds perfect embedding and coincident-point convention") {
  Rng rng(8);
  MdsRandomSpec spec;
  spec.n = 6;
  spec.source_dim = 2;
  spec.embed_dim = 2;
  const MdsInstance inst = genMdsInstance(spec, rng);
  MdsObjective obj(inst.delta, 2);
  Blocks x;
  for (int i = 0; i < spec.n; ++i) x.push_back(inst.source_points.col(i));
  const Evaluation ev = obj.evaluate(x);
  CHECK(ev.value == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(blocks::norm(ev.subgradient) == doctest::Approx(0.0).epsilon(1e-12));

  // Coincident pair contributes delta^2 with zero subgradient.
  Matrix delta(2, 2);
  delta << 0, 2, 2, 0;
  MdsObjective small(delta, 2);
  const Blocks same = {Vector::Zero(2).eval(), Vector::Zero(2).eval()};
  const Evaluation ev2 = small.evaluate(same);
  CHECK(ev2.value == doctest::Approx(4.0));
  CHECK(blocks::norm(ev2.subgradient) == 0.0);
}

TEST_CASE("mds input validation") {
  Matrix bad(2, 2);
  bad << 0, 1, 2, 0;
  CHECK_THROWS_AS(MdsObjective(bad, 2), InvalidInput);
  Matrix diag(2, 2);
  diag << 1, 1, 1, 0;
  CHECK_THROWS_AS(MdsObjective(diag, 2), InvalidInput);
}

TEST_CASE("mssc dc identity on random instances") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    GaussianClustersSpec spec;
    spec.l = 1 + trial % 4;
    spec.n_per = 6;
    spec.dim = 2;
    LabeledDataset data = genGaussianClusters(spec, rng);
    const int l = 1 + (trial % 3);
    const double rho = (trial % 2) ? 0.0 : 1e-3;
    MsscDcProgram prog(data, l, rho);
    ClusteringObjective phi(data, l, Dissimilarity::SquaredEuclidean);
    const Blocks x = geometry::randomPoint(phi.domain(), rng);
    const DcEvaluation dc = prog.evaluateDc(x);
    const double direct = phi.value(x);
    CHECK(dc.g_value - dc.h_value ==
          doctest::Approx(direct).epsilon(1e-10).scale(std::max(1.0, std::abs(direct))));
  }
  CHECK_THROWS_AS(
      MsscDcProgram(euclideanData({scalar(0.0), scalar(1.0)}), 1, -1.0), InvalidInput);
}

TEST_CASE("mssc dc degenerate single center") {
  // l = 1: the inner sum over t != j is empty, h = (rho/2)||X||^2.
  const LabeledDataset data = euclideanData({scalar(1.0), scalar(5.0)});
  MsscDcProgram prog(data, 1, 0.5);
  const Blocks x = {scalar(2.0)};
  const DcEvaluation dc = prog.evaluateDc(x);
  CHECK(dc.h_value == doctest::Approx(0.25 * 4.0));  // rho/2 * x^2
  const double expected_g = 0.5 * ((2.0 - 1.0) * (2.0 - 1.0) + (2.0 - 5.0) * (2.0 - 5.0)) +
                            0.25 * 4.0;
  CHECK(dc.g_value == doctest::Approx(expected_g));
}

TEST_CASE("mssc dc gradient difference matches the oracle at unique argmax") {
  Rng rng(10);
  GaussianClustersSpec spec;
  spec.l = 3;
  spec.n_per = 10;
  spec.dim = 2;
  LabeledDataset data = genGaussianClusters(spec, rng);
  ClusteringObjective phi(data, 3, Dissimilarity::SquaredEuclidean);
  MsscDcProgram prog(data, 3, 0.0);
  int tested = 0;
  while (tested < 20) {
    const Blocks x = geometry::randomPoint(phi.domain(), rng);
    if (phi.assignmentMargin(x) <= 1e-6) continue;
    ++tested;
    const DcEvaluation dc = prog.evaluateDc(x);
    const Evaluation ev = phi.evaluate(x);
    Blocks diff = dc.g_gradient;
    blocks::axpy(-1.0, dc.h_subgradient, diff);
    CHECK(blocks::norm(blocks::difference(diff, ev.subgradient)) <= 1e-10);
  }
}

TEST_CASE("mds dc identity carries the delta-squared constant") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    MdsRandomSpec spec;
    spec.n = 4 + trial % 5;
    spec.source_dim = 3;
    spec.embed_dim = 2;
    const MdsInstance inst = genMdsInstance(spec, rng);
    MdsDcProgram prog(inst.delta, 2, 1e-3);
    MdsObjective phi(inst.delta, 2);
    const Blocks x = geometry::randomPoint(phi.domain(), rng);
    const DcEvaluation dc = prog.evaluateDc(x);
    const double direct = phi.value(x);
    CHECK(dc.g_value - dc.h_value + prog.offset() ==
          doctest::Approx(direct).epsilon(1e-10).scale(std::max(1.0, std::abs(direct))));
  }
}

TEST_CASE("mds dc single pair expands by hand") {
  // phi = (d - delta)^2 = d^2 - 2 delta d + delta^2 with d = |x1 - x2|.
  Matrix delta(2, 2);
  delta << 0, 2, 2, 0;
  MdsDcProgram prog(delta, 1, 0.0);
  const Blocks x = {scalar(0.0), scalar(3.0)};
  const DcEvaluation dc = prog.evaluateDc(x);
  CHECK(dc.g_value == doctest::Approx(9.0));        // d^2
  CHECK(dc.h_value == doctest::Approx(2.0 * 2.0 * 3.0));  // 2 delta d
  CHECK(prog.offset() == doctest::Approx(4.0));     // delta^2
  MdsObjective phi(delta, 1);
  CHECK(dc.g_value - dc.h_value + prog.offset() == doctest::Approx(phi.value(x)));
  // Perfect embedding makes both the value and the identity residual vanish.
  const Blocks fit = {scalar(0.0), scalar(2.0)};
  CHECK(phi.value(fit) == doctest::Approx(0.0));
}

TEST_CASE("upper-C2 descent inequality holds locally for mssc") {
  Rng rng(12);
  GaussianClustersSpec spec;
  spec.l = 3;
  spec.n_per = 10;
  spec.dim = 3;
  LabeledDataset data = genGaussianClusters(spec, rng);
  ClusteringObjective obj(data, 3, Dissimilarity::SquaredEuclidean);

  double max_norm = 0.0;
  for (const Matrix& p : data.points) max_norm = std::max(max_norm, p.norm());
  const double kappa = 1.0 + max_norm;

  for (int trial = 0; trial < 100; ++trial) {
    const Blocks x = geometry::randomPoint(obj.domain(), rng);
    Blocks step;
    for (Index i = 0; i < obj.domain().blockCount(); ++i) step.push_back(rng.gaussian(3, 1));
    const double norm = blocks::norm(step);
    const double radius = 0.1 * rng.uniform();
    step = blocks::scaled(step, radius / norm);
    Blocks y = x;
    blocks::axpy(1.0, step, y);

    const Evaluation ev = obj.evaluate(x);
    const double lhs = obj.value(y);
    const double rhs = ev.value + blocks::dot(ev.subgradient, step) +
                       kappa * blocks::squaredNorm(step);
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("incompatible dissimilarity kinds are rejected") {
  const LabeledDataset data = euclideanData({scalar(0.0)});
  CHECK_THROWS_AS(ClusteringObjective(data, 1, Dissimilarity::Cosine), InvalidInput);
  CHECK_THROWS_AS(checkCompatible(Dissimilarity::StiefelTrace, Manifold::sphere(3)),
                  InvalidInput);
}
