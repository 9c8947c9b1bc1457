#pragma once

#include "nmsub/dca.hpp"
#include "nmsub/dataset.hpp"
#include "nmsub/keyval.hpp"
#include "nmsub/kmeans.hpp"
#include "nmsub/metrics.hpp"
#include "nmsub/objectives.hpp"
#include "nmsub/solver.hpp"
#include "nmsub/synthgen.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nmsub {

/// A fully materialized problem instance: either a clustering task over a
/// dataset or an MDS embedding task.
struct ProblemInstance {
  std::string name;
  std::string kind;  // "mssc" | "cluster" | "mds"
  LabeledDataset dataset;            // clustering input (also MDS source when generated)
  Dissimilarity dissim = Dissimilarity::SquaredEuclidean;
  int num_centers = 0;
  std::optional<MdsInstance> mds;
  Matrix mds_weights;  // empty = all ones

  std::unique_ptr<Objective> makeObjective() const;
  std::unique_ptr<DcProgram> makeDcProgram(double rho) const;
  /// Initial point: l distinct data points as centroids, or a Gaussian
  /// embedding for MDS.
  Blocks initialPoint(Rng& rng) const;
};

/// One named solver entry of the experiment matrix.
struct SolverSpec {
  std::string name;
  std::string kind;  // "subgradient" | "dca" | "bdca" | "skmeans"
  SolverConfig solver;
  DcaConfig dca;
  int kmeans_max_iter = 300;
  bool termination_auto = true;  // pick EuclideanBoth/FunctionOnly from the domain

  bool isSubgradient() const { return kind == "subgradient"; }
};

struct ExperimentConfig {
  std::vector<KeyVal> problem_sections;  // raw problem descriptions
  std::vector<SolverSpec> solvers;
  int repetitions = 1;
  int restarts = 1;        // per repetition, best final value wins
  long base_seed = 0;
  double epsilon = 1e-6;
  int jobs = 1;

  /// Parses the flat key-value experiment description; see README for keys.
  static ExperimentConfig parse(const KeyVal& kv);
};

ProblemInstance materializeProblem(const KeyVal& section, double epsilon_hint);

struct RunSummary {
  std::string problem;
  std::string solver;
  int repetition = 0;
  long seed = 0;
  std::string status;
  double wall_time_s = 0.0;
  double final_value = 0.0;
  int iterations = 0;
  long total_backtracks = 0;
  double homogeneity = std::numeric_limits<double>::quiet_NaN();
  double completeness = std::numeric_limits<double>::quiet_NaN();
  double v_measure = std::numeric_limits<double>::quiet_NaN();
  double ari = std::numeric_limits<double>::quiet_NaN();
  int invariant_violations = 0;
  bool failed = false;

  bool converged() const { return status == "Converged"; }
};

struct ExperimentResult {
  std::vector<RunSummary> runs;
  std::vector<std::string> trace_files;
};

/// Runs the full problems x solvers x repetitions matrix. Traces and the
/// summary/aggregate tables go to out_dir when it is nonempty; independent
/// runs execute on up to `jobs` threads and are merged in task order.
ExperimentResult runExperiment(const ExperimentConfig& config, const std::string& out_dir);

/// Cost table over converged runs (cost = wall time or iteration count).
ProfileTable buildProfileTable(const ExperimentConfig& config, const ExperimentResult& result,
                               bool use_time);

std::string formatSummaryCsv(const std::vector<RunSummary>& runs);
std::string formatAggregateCsv(const ExperimentConfig& config,
                               const std::vector<RunSummary>& runs);

}  // namespace nmsub
