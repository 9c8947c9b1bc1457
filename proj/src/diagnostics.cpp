#include "nmsub/diagnostics.hpp"

#include "nmsub/dca.hpp"
#include "nmsub/geometry.hpp"
#include "nmsub/metrics.hpp"
#include "nmsub/objectives.hpp"
#include "nmsub/solver.hpp"
#include "nmsub/synthgen.hpp"

#include <cmath>
#include <functional>
#include <sstream>

namespace nmsub {

namespace {

using geometry::membershipResidual;
using geometry::randomPoint;
using geometry::randomTangent;
using geometry::retract;
using geometry::tangencyResidual;
using geometry::tangentProject;

struct Battery {
  std::vector<CheckResult> results;

  void add(const std::string& name, double residual, double tol, const std::string& detail = "") {
    CheckResult r;
    r.name = name;
    r.residual = residual;
    r.pass = residual <= tol;
    std::ostringstream d;
    d << "residual " << residual << " tol " << tol;
    if (!detail.empty()) d << " (" << detail << ")";
    r.detail = d.str();
    results.push_back(std::move(r));
  }
};

std::vector<Manifold> testManifolds() {
  return {Manifold::euclidean(4), Manifold::sphere(6), Manifold::stiefel(5, 2),
          Manifold::grassmann(6, 3),
          Manifold::product({Manifold::sphere(4), Manifold::stiefel(4, 2)})};
}

void geometryChecks(Battery& b) {
  Rng rng(20240901);
  double worst_zero = 0.0, worst_first = 0.0, worst_member = 0.0;
  double worst_idem = 0.0, worst_tangency = 0.0, worst_expansive = 0.0;
  for (const Manifold& m : testManifolds()) {
    for (int trial = 0; trial < 100; ++trial) {
      const Blocks x = randomPoint(m, rng);
      worst_member = std::max(worst_member, membershipResidual(m, x));
      const Blocks xi = randomTangent(m, x, rng);

      // R_x(0) = x
      const Blocks zero = blocks::zerosLike(xi);
      worst_zero = std::max(
          worst_zero, blocks::norm(blocks::difference(retract(m, x, zero), x)));

      // || R_x(t xi) - x - t xi || <= beta t^2 ||xi||^2 with a fitted constant
      const double xin2 = blocks::squaredNorm(xi);
      for (const double t : {1e-2, 1e-3}) {
        const Blocks moved = retract(m, x, blocks::scaled(xi, t));
        Blocks res = blocks::difference(moved, x);
        blocks::axpy(-t, xi, res);
        if (xin2 > 0)
          worst_first = std::max(worst_first, blocks::norm(res) / (t * t * xin2));
        worst_member = std::max(worst_member, membershipResidual(m, moved));
      }

      // Projection: idempotent, tangent, non-expansive.
      const Blocks v = randomPoint(m, rng);  // arbitrary ambient data
      const Blocks pv = tangentProject(m, x, v);
      const Blocks ppv = tangentProject(m, x, pv);
      worst_idem = std::max(worst_idem, blocks::norm(blocks::difference(ppv, pv)));
      worst_tangency = std::max(worst_tangency, tangencyResidual(m, x, pv));
      worst_expansive = std::max(worst_expansive, blocks::norm(pv) - blocks::norm(v));
    }
  }
  b.add("geometry.retract_zero_identity", worst_zero, 1e-12);
  b.add("geometry.retract_first_order", worst_first, 10.0, "fitted beta constant");
  b.add("geometry.retract_membership", worst_member, 1e-10);
  b.add("geometry.projection_idempotent", worst_idem, 1e-12);
  b.add("geometry.projection_tangency", worst_tangency, 1e-10);
  b.add("geometry.projection_nonexpansive", worst_expansive, 1e-12);
}

/// Central finite differences of phi(retract(x, t e_i)) against the projected
/// subgradient, at points with a strictly separated argmin.
double fdWorstError(const Objective& obj, const Blocks& x, Rng& rng, int directions,
                    double h, double fault_sign) {
  const Manifold& m = obj.domain();
  Evaluation ev = obj.evaluate(x);
  for (Matrix& g : ev.subgradient) g *= fault_sign;
  const Blocks w = tangentProject(m, x, ev.subgradient);
  double worst = 0.0;
  for (int d = 0; d < directions; ++d) {
    Blocks dir = randomTangent(m, x, rng);
    const double n = blocks::norm(dir);
    if (n == 0.0) continue;
    dir = blocks::scaled(dir, 1.0 / n);
    const double plus = obj.value(retract(m, x, blocks::scaled(dir, h)));
    const double minus = obj.value(retract(m, x, blocks::scaled(dir, -h)));
    const double fd = (plus - minus) / (2.0 * h);
    const double an = blocks::dot(w, dir);
    worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

// Random center configuration with a strictly separated argmin for every
// data point, so central differences see a locally smooth objective.
Blocks separatedPoint(const ClusteringObjective& obj, Rng& rng, double margin = 1e-4) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Blocks x = randomPoint(obj.domain(), rng);
    if (obj.assignmentMargin(x) > margin) return x;
  }
  throw std::runtime_error("could not sample a strictly separated configuration");
}

void oracleChecks(Battery& b, FaultInjection fault) {
  const double sign = fault == FaultInjection::FlipSubgradientSign ? -1.0 : 1.0;
  Rng rng(7);

  {  // MSSC on Gaussian clusters
    GaussianClustersSpec spec;
    spec.l = 3;
    spec.n_per = 20;
    spec.dim = 3;
    LabeledDataset data = genGaussianClusters(spec, rng);
    ClusteringObjective obj(data, 3, Dissimilarity::SquaredEuclidean);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Blocks x = separatedPoint(obj, rng);
      worst = std::max(worst, fdWorstError(obj, x, rng, 5, 1e-6, sign));
    }
    b.add("oracle.mssc_finite_difference", worst, 1e-4);
  }
  {  // cosine clustering on the sphere
    VmfClustersSpec spec;
    spec.l = 3;
    spec.n_per = 15;
    spec.ambient_dim = 8;
    spec.kappa = 20.0;
    LabeledDataset data = genVmfClusters(spec, rng);
    ClusteringObjective obj(data, 3, Dissimilarity::Cosine);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Blocks x = separatedPoint(obj, rng);
      worst = std::max(worst, fdWorstError(obj, x, rng, 5, 1e-6, sign));
    }
    b.add("oracle.cosine_finite_difference", worst, 1e-4);
  }
  {  // Stiefel and Grassmann dissimilarities
    FrameClustersSpec spec;
    spec.n = 6;
    spec.p = 2;
    spec.l = 2;
    spec.n_per = 10;
    LabeledDataset st = genFrameClusters(spec, rng);
    ClusteringObjective obj(st, 2, Dissimilarity::StiefelTrace);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Blocks x = separatedPoint(obj, rng);
      worst = std::max(worst, fdWorstError(obj, x, rng, 5, 1e-6, sign));
    }
    b.add("oracle.stiefel_finite_difference", worst, 1e-4);

    spec.grassmann_target = true;
    LabeledDataset gr = genFrameClusters(spec, rng);
    ClusteringObjective gobj(gr, 2, Dissimilarity::GrassmannProjector);
    worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Blocks x = separatedPoint(gobj, rng);
      worst = std::max(worst, fdWorstError(gobj, x, rng, 5, 1e-6, sign));
    }
    b.add("oracle.grassmann_finite_difference", worst, 1e-4);

    // Invariance of the Grassmann objective under representative rotation.
    double worst_inv = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      const Blocks u = randomPoint(gobj.domain(), rng);
      Blocks rotated = u;
      for (Matrix& block : rotated) {
        Blocks q = randomPoint(Manifold::stiefel(block.cols(), block.cols()), rng);
        block = block * q.front();
      }
      worst_inv = std::max(worst_inv, std::abs(gobj.value(u) - gobj.value(rotated)));
    }
    b.add("oracle.grassmann_rotation_invariance", worst_inv, 1e-10);
  }
  {  // MDS finite differences at a random non-coincident configuration
    MdsRandomSpec spec;
    spec.n = 12;
    spec.source_dim = 6;
    spec.embed_dim = 2;
    const MdsInstance inst = genMdsInstance(spec, rng);
    MdsObjective obj(inst.delta, inst.embed_dim);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
      const Blocks x = randomPoint(obj.domain(), rng);
      worst = std::max(worst, fdWorstError(obj, x, rng, 5, 1e-6, sign));
    }
    b.add("oracle.mds_finite_difference", worst, 1e-4);
  }
}

void dcChecks(Battery& b) {
  Rng rng(11);
  double worst_mssc = 0.0;
  double worst_mds = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    GaussianClustersSpec spec;
    spec.l = 2 + trial % 3;
    spec.n_per = 8;
    spec.dim = 2;
    LabeledDataset data = genGaussianClusters(spec, rng);
    const int l = 2 + (trial + 1) % 3;
    MsscDcProgram prog(data, l, 1e-3);
    ClusteringObjective phi(data, l, Dissimilarity::SquaredEuclidean);
    const Blocks x = randomPoint(phi.domain(), rng);
    const DcEvaluation dc = prog.evaluateDc(x);
    const double direct = phi.value(x);
    worst_mssc = std::max(worst_mssc, std::abs(dc.g_value - dc.h_value - direct) /
                                          std::max(1.0, std::abs(direct)));

    MdsRandomSpec mspec;
    mspec.n = 8;
    mspec.source_dim = 4;
    mspec.embed_dim = 2;
    const MdsInstance inst = genMdsInstance(mspec, rng);
    MdsDcProgram mprog(inst.delta, inst.embed_dim, 1e-3);
    MdsObjective mphi(inst.delta, inst.embed_dim);
    const Blocks y = randomPoint(mphi.domain(), rng);
    const DcEvaluation mdc = mprog.evaluateDc(y);
    const double mdirect = mphi.value(y);
    worst_mds = std::max(worst_mds,
                         std::abs(mdc.g_value - mdc.h_value + mprog.offset() - mdirect) /
                             std::max(1.0, std::abs(mdirect)));
  }
  b.add("dc.mssc_identity", worst_mssc, 1e-10, "g - h = phi over 100 instances");
  b.add("dc.mds_identity", worst_mds, 1e-10, "g - h + sum w delta^2 = phi over 100 instances");
}

void solverChecks(Battery& b) {
  Rng rng(23);
  GaussianClustersSpec spec;
  spec.l = 3;
  spec.n_per = 30;
  spec.dim = 3;
  LabeledDataset data = genGaussianClusters(spec, rng);
  ClusteringObjective obj(data, 3, Dissimilarity::SquaredEuclidean);

  SolverConfig cfg;
  cfg.reference_rule = ReferenceRule::Mean;
  cfg.epsilon = 1e-8;
  cfg.termination = TerminationMode::EuclideanBoth;
  const Blocks x0 = randomPoint(obj.domain(), rng);
  const SolveResult res = solve(obj, x0, cfg);

  auto residual = [&res](const std::string& name) {
    const auto it = res.invariants.worst_residual.find(name);
    return it == res.invariants.worst_residual.end() ? 0.0 : std::max(0.0, it->second);
  };
  b.add("solver.acceptance_inequality", residual("acceptance"), 0.0);
  b.add("solver.delta_nonnegative", residual("delta_nonneg"), 0.0);
  b.add("solver.reference_monotone", residual("reference_monotone"), 1e-12);
  b.add("solver.sandwich_lower", residual("sandwich_lower"), 1e-10);
  b.add("solver.sandwich_upper", residual("sandwich_upper"), 1e-10);
  b.add("solver.telescoping_bound", residual("telescoping_bound"), 1e-10);

  // delta_k recomputed from the trace: delta = sigma tau ||w||^2 for the
  // negative-subgradient direction.
  double worst = 0.0;
  for (const IterationRecord& r : res.trace)
    worst = std::max(worst, std::abs(r.delta - cfg.sigma * r.tau * r.w_norm * r.w_norm) /
                                std::max(1.0, r.delta));
  b.add("solver.delta_matches_direction", worst, 1e-10);

  // Barzilai-Borwein on the quadratic 0.5 ||x||^2 returns the exact curvature.
  struct HalfSq : Objective {
    Manifold m = Manifold::euclidean(4);
    const Manifold& domain() const override { return m; }
    double value(const Blocks& x) const override { return 0.5 * blocks::squaredNorm(x); }
    Evaluation evaluate(const Blocks& x) const override { return {value(x), x}; }
  } half_sq;
  Rng r2(5);
  const Blocks xa = randomPoint(half_sq.m, r2);
  const Blocks xb = randomPoint(half_sq.m, r2);
  const double tau = initialStepBb(blocks::difference(xb, xa), xa, xb, half_sq.m, xb,
                                   1e-10, 1e10);
  b.add("solver.bb_quadratic_curvature", std::abs(tau - 1.0), 1e-12);
}

void metricChecks(Battery& b) {
  const Partition truth = Partition::fromAssignments({0, 0, 1, 1});
  const Partition crossing = Partition::fromAssignments({0, 1, 0, 1});
  const ClusterScores s = homogeneityCompletenessV(crossing, truth);
  b.add("metrics.uniform_contingency_v_zero",
        std::abs(s.homogeneity) + std::abs(s.completeness) + std::abs(s.v_measure), 1e-12);
  b.add("metrics.identical_partitions_ari",
        std::abs(adjustedRandIndex(truth, truth) - 1.0), 1e-12);
  // Crossing pair by direct pair counting: 0 agreeing same-cluster pairs
  // against expectation 2/3 gives the distribution's lower bound -1/2.
  b.add("metrics.crossing_partitions_ari",
        std::abs(adjustedRandIndex(crossing, truth) - (-0.5)), 1e-12);
}

void baselineChecks(Battery& b) {
  Rng rng(31);
  GaussianClustersSpec spec;
  spec.l = 2;
  spec.n_per = 25;
  spec.dim = 2;
  LabeledDataset data = genGaussianClusters(spec, rng);
  MsscDcProgram prog(data, 2, 1e-3);
  DcaConfig cfg;
  cfg.bdca = true;
  const Blocks x0 = geometry::randomPoint(prog.objective().domain(), rng);
  const SolveResult res = dcaSolve(prog, x0, cfg);
  auto residual = [&res](const std::string& name) {
    const auto it = res.invariants.worst_residual.find(name);
    return it == res.invariants.worst_residual.end() ? 0.0 : std::max(0.0, it->second);
  };
  b.add("baseline.dca_descent", residual("dca_descent"), 1e-10);
  b.add("baseline.dca_first_order", residual("dca_first_order"), 1e-8);
  b.add("baseline.bdca_chain", residual("bdca_chain"), 1e-10);
}

}  // namespace

std::vector<CheckResult> runInvariantBattery(FaultInjection fault) {
  Battery b;
  geometryChecks(b);
  oracleChecks(b, fault);
  dcChecks(b);
  solverChecks(b);
  metricChecks(b);
  baselineChecks(b);
  return b.results;
}

}  // namespace nmsub
