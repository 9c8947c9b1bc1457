#include "nmsub/diagnostics.hpp"
#include "nmsub/experiment.hpp"
#include "nmsub/metrics.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace nmsub;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitInvalid = 2;

LabeledDataset generateFromSpecFile(const KeyVal& kv, long seed_override) {
  KeyVal section;
  for (const auto& [k, v] : kv.entries()) section.set("gen." + k, v);
  section.set("kind", "cluster");
  section.set("name", kv.getString("name", "generated"));
  section.set("l", kv.getString("l", "1"));
  if (seed_override >= 0) section.set("gen.seed", std::to_string(seed_override));
  ProblemInstance prob = materializeProblem(section, 1e-6);
  prob.dataset.meta["family"] = kv.getString("family");
  prob.dataset.meta["seed"] =
      seed_override >= 0 ? std::to_string(seed_override) : kv.getString("seed", "1");
  return prob.dataset;
}

int cmdGenData(const std::string& config_path, const std::string& out_path, long seed) {
  KeyVal kv = KeyVal::load(config_path);
  if (seed < 0 && kv.has("seed")) seed = kv.getInt("seed");
  if (kv.getString("family") == "mds") {
    MdsRandomSpec spec;
    spec.n = static_cast<int>(kv.getInt("n"));
    spec.source_dim = static_cast<int>(kv.getInt("source_dim"));
    spec.embed_dim = static_cast<int>(kv.getInt("embed_dim", 2));
    Rng rng(static_cast<std::uint64_t>(seed < 0 ? 1 : seed));
    const MdsInstance inst = genMdsInstance(spec, rng);
    LabeledDataset data;
    data.name = kv.getString("name", "mds-source");
    data.point_manifold = Manifold::euclidean(spec.source_dim);
    for (Index i = 0; i < inst.source_points.cols(); ++i)
      data.points.push_back(inst.source_points.col(i));
    data.meta["family"] = "mds";
    data.meta["seed"] = std::to_string(seed < 0 ? 1 : seed);
    writeCsv(data, out_path);
  } else {
    writeCsv(generateFromSpecFile(kv, seed), out_path);
  }
  std::cout << "wrote " << out_path << " (+.meta)\n";
  return kExitOk;
}

ExperimentConfig loadExperiment(const std::string& config_path, long seed, double epsilon,
                                int jobs) {
  KeyVal kv = KeyVal::load(config_path);
  if (seed >= 0) kv.set("base_seed", std::to_string(seed));
  if (epsilon > 0) kv.set("epsilon", std::to_string(epsilon));
  if (jobs > 0) kv.set("jobs", std::to_string(jobs));
  return ExperimentConfig::parse(kv);
}

int cmdSolve(const std::string& config_path, const std::string& out_dir, long seed,
             double epsilon, int jobs) {
  const ExperimentConfig cfg = loadExperiment(config_path, seed, epsilon, jobs);
  const ExperimentResult result = runExperiment(cfg, out_dir);
  std::cout << formatSummaryCsv(result.runs);
  int failures = 0;
  for (const RunSummary& r : result.runs) failures += r.failed ? 1 : 0;
  if (failures > 0) {
    std::cerr << failures << " run(s) failed\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int cmdBench(const std::string& config_path, const std::string& out_dir, long seed,
             double epsilon, int jobs) {
  const ExperimentConfig cfg = loadExperiment(config_path, seed, epsilon, jobs);
  if (cfg.solvers.size() < 2)
    throw InvalidInput("bench needs at least two solvers to compare");
  const ExperimentResult result = runExperiment(cfg, out_dir);

  const ProfileTable time_table = buildProfileTable(cfg, result, /*use_time=*/true);
  const ProfileCurve time_curve = performanceProfile(time_table);
  const ProfileTable iter_table = buildProfileTable(cfg, result, /*use_time=*/false);
  const ProfileCurve iter_curve = performanceProfile(iter_table);
  if (!out_dir.empty()) {
    std::ofstream t((std::filesystem::path(out_dir) / "profile_time.csv").string());
    t << formatProfile(time_curve);
    std::ofstream i((std::filesystem::path(out_dir) / "profile_iterations.csv").string());
    i << formatProfile(iter_curve);
  }
  std::cout << formatProfile(time_curve);
  return kExitOk;
}

int cmdCheck(bool inject_fault) {
  const auto results = runInvariantBattery(inject_fault ? FaultInjection::FlipSubgradientSign
                                                        : FaultInjection::None);
  int failed = 0;
  for (const CheckResult& r : results) {
    std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  " << r.detail << "\n";
    failed += r.pass ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " invariants hold\n";
  return failed == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonmonotone subgradient descent on manifolds: benchmark harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  long seed = -1;
  double epsilon = -1.0;
  int jobs = -1;
  bool inject_fault = false;

  CLI::App* gen = app.add_subcommand("gen-data", "Generate a dataset CSV from a spec file");
  gen->add_option("--config", config_path, "generator spec file")->required();
  gen->add_option("--out", out, "output CSV path")->required();
  gen->add_option("--seed", seed, "override the spec seed");

  CLI::App* solve_cmd = app.add_subcommand("solve", "Run the configured solver matrix");
  solve_cmd->add_option("--config", config_path, "experiment config file")->required();
  solve_cmd->add_option("--out", out, "output directory for traces and summaries");
  solve_cmd->add_option("--seed", seed, "override base_seed");
  solve_cmd->add_option("--epsilon", epsilon, "override the stopping tolerance");
  solve_cmd->add_option("--jobs", jobs, "concurrent runs");

  CLI::App* bench = app.add_subcommand("bench", "Run the matrix and emit performance profiles");
  bench->add_option("--config", config_path, "experiment config file")->required();
  bench->add_option("--out", out, "output directory");
  bench->add_option("--seed", seed, "override base_seed");
  bench->add_option("--epsilon", epsilon, "override the stopping tolerance");
  bench->add_option("--jobs", jobs, "concurrent runs");

  CLI::App* check = app.add_subcommand("check", "Run the invariant battery");
  check->add_flag("--inject-fault", inject_fault,
                  "corrupt the oracle subgradients to test fault detection");

  try {
    app.parse(argc, argv);
    if (gen->parsed()) return cmdGenData(config_path, out, seed);
    if (solve_cmd->parsed()) return cmdSolve(config_path, out, seed, epsilon, jobs);
    if (bench->parsed()) return cmdBench(config_path, out, seed, epsilon, jobs);
    if (check->parsed()) return cmdCheck(inject_fault);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitInvalid;
  } catch (const nmsub::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}
