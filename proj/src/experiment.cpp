#include "nmsub/experiment.hpp"

#include "nmsub/geometry.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace nmsub {

namespace {

Dissimilarity dissimilarityByName(const std::string& s) {
  if (s == "sqeuclidean") return Dissimilarity::SquaredEuclidean;
  if (s == "cosine") return Dissimilarity::Cosine;
  if (s == "stiefel") return Dissimilarity::StiefelTrace;
  if (s == "grassmann") return Dissimilarity::GrassmannProjector;
  throw InvalidInput("unknown dissimilarity: " + s);
}

Dissimilarity defaultDissimilarity(const Manifold& point_manifold) {
  switch (point_manifold.kind()) {
    case Manifold::Kind::Euclidean: return Dissimilarity::SquaredEuclidean;
    case Manifold::Kind::Sphere: return Dissimilarity::Cosine;
    case Manifold::Kind::Stiefel: return Dissimilarity::StiefelTrace;
    case Manifold::Kind::Grassmann: return Dissimilarity::GrassmannProjector;
    case Manifold::Kind::Product: break;
  }
  throw InvalidInput("no default dissimilarity for product data");
}

LabeledDataset generateDataset(const KeyVal& kv, const std::string& prefix, long seed) {
  const std::string family = kv.getString(prefix + "family");
  Rng rng(static_cast<std::uint64_t>(seed));
  if (family == "gaussian") {
    GaussianClustersSpec spec;
    spec.l = static_cast<int>(kv.getInt(prefix + "l"));
    spec.n_per = static_cast<int>(kv.getInt(prefix + "n_per"));
    spec.dim = static_cast<int>(kv.getInt(prefix + "dim"));
    spec.center_std = kv.getDouble(prefix + "center_std", 10.0);
    spec.point_std = kv.getDouble(prefix + "point_std", 1.0);
    return genGaussianClusters(spec, rng);
  }
  if (family == "vmf") {
    VmfClustersSpec spec;
    spec.l = static_cast<int>(kv.getInt(prefix + "l"));
    spec.n_per = static_cast<int>(kv.getInt(prefix + "n_per"));
    spec.ambient_dim = static_cast<int>(kv.getInt(prefix + "ambient_dim"));
    spec.kappa = kv.getDouble(prefix + "kappa", 10.0);
    return genVmfClusters(spec, rng);
  }
  if (family == "frames") {
    FrameClustersSpec spec;
    spec.n = static_cast<int>(kv.getInt(prefix + "n"));
    spec.p = static_cast<int>(kv.getInt(prefix + "p"));
    spec.l = static_cast<int>(kv.getInt(prefix + "l"));
    spec.n_per = static_cast<int>(kv.getInt(prefix + "n_per"));
    spec.noise_halfwidth = kv.getDouble(prefix + "noise", spec.noise_halfwidth);
    spec.grassmann_target = kv.getString(prefix + "target", "stiefel") == "grassmann";
    return genFrameClusters(spec, rng);
  }
  throw InvalidInput("unknown generator family: " + family);
}

Matrix pairwiseDistances(const LabeledDataset& data) {
  const Matrix& s = data.stacked();
  const Index n = s.cols();
  Matrix d = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      d(i, j) = (s.col(i) - s.col(j)).norm();
      d(j, i) = d(i, j);
    }
  return d;
}

}  // namespace

std::unique_ptr<Objective> ProblemInstance::makeObjective() const {
  if (kind == "mds")
    return std::make_unique<MdsObjective>(mds->delta, mds->embed_dim, mds_weights);
  return std::make_unique<ClusteringObjective>(dataset, num_centers, dissim);
}

std::unique_ptr<DcProgram> ProblemInstance::makeDcProgram(double rho) const {
  if (kind == "mds")
    return std::make_unique<MdsDcProgram>(mds->delta, mds->embed_dim, rho, mds_weights);
  if (kind == "mssc") return std::make_unique<MsscDcProgram>(dataset, num_centers, rho);
  throw InvalidInput("DC baselines are defined for mssc and mds problems only");
}

Blocks ProblemInstance::initialPoint(Rng& rng) const {
  if (kind == "mds") {
    Blocks x;
    const Index n = mds->delta.rows();
    x.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) x.push_back(rng.gaussian(mds->embed_dim, 1));
    return x;
  }
  const std::vector<int> idx = rng.sampleWithoutReplacement(dataset.size(), num_centers);
  Blocks x;
  x.reserve(idx.size());
  for (int i : idx) x.push_back(dataset.points[static_cast<std::size_t>(i)]);
  return x;
}

ProblemInstance materializeProblem(const KeyVal& section, double epsilon_hint) {
  ProblemInstance prob;
  prob.name = section.getString("name", "problem");
  prob.kind = section.getString("kind");
  if (prob.kind != "mssc" && prob.kind != "cluster" && prob.kind != "mds")
    throw InvalidInput("problem kind must be mssc, cluster or mds");
  (void)epsilon_hint;

  const bool generated = section.has("gen.family");
  if (prob.kind == "mds") {
    prob.mds.emplace();
    if (generated && section.getString("gen.family") == "mds") {
      MdsRandomSpec spec;
      spec.n = static_cast<int>(section.getInt("gen.n"));
      spec.source_dim = static_cast<int>(section.getInt("gen.source_dim"));
      spec.embed_dim = static_cast<int>(section.getInt("embed_dim", 2));
      Rng rng(static_cast<std::uint64_t>(section.getInt("gen.seed", 1)));
      *prob.mds = genMdsInstance(spec, rng);
    } else if (section.has("data")) {
      // Dissimilarities are the pairwise distances of the loaded points.
      prob.dataset = section.has("labels")
                         ? readPlainCsv(section.getString("data"), section.getString("labels"))
                         : readCsv(section.getString("data"));
      prob.mds->delta = pairwiseDistances(prob.dataset);
      prob.mds->embed_dim = static_cast<int>(section.getInt("embed_dim", 2));
    } else {
      throw InvalidInput("mds problem needs gen.family = mds or a data path");
    }
    return prob;
  }

  if (generated) {
    prob.dataset = generateDataset(section, "gen.", section.getInt("gen.seed", 1));
  } else if (section.has("data")) {
    const std::string path = section.getString("data");
    if (section.has("labels"))
      prob.dataset = readPlainCsv(path, section.getString("labels"),
                                  section.getBool("normalize", false));
    else
      prob.dataset = readCsv(path);
  } else {
    throw InvalidInput("problem needs either gen.* keys or a data path");
  }

  prob.num_centers = static_cast<int>(section.getInt("l"));
  if (prob.num_centers < 1) throw InvalidInput("problem: l must be >= 1");
  if (prob.kind == "mssc" && prob.dataset.point_manifold.kind() != Manifold::Kind::Euclidean)
    throw InvalidInput("mssc requires Euclidean data");
  prob.dissim = section.has("dissimilarity")
                    ? dissimilarityByName(section.getString("dissimilarity"))
                    : defaultDissimilarity(prob.dataset.point_manifold);
  checkCompatible(prob.dissim, prob.dataset.point_manifold);
  return prob;
}

namespace {

SolverSpec parseSolver(const KeyVal& kv, const std::string& name, double global_epsilon) {
  const std::string prefix = "solver." + name + ".";
  SolverSpec spec;
  spec.name = name;
  spec.kind = kv.getString(prefix + "kind", "subgradient");

  SolverConfig& s = spec.solver;
  s.sigma = kv.getDouble(prefix + "sigma", s.sigma);
  s.beta = kv.getDouble(prefix + "beta", s.beta);
  s.tau_min = kv.getDouble(prefix + "tau_min", s.tau_min);
  s.tau_max = kv.getDouble(prefix + "tau_max", s.tau_max);
  const std::string rule = kv.getString(prefix + "reference_rule", "mean");
  if (rule == "monotone") s.reference_rule = ReferenceRule::Monotone;
  else if (rule == "mean") s.reference_rule = ReferenceRule::Mean;
  else if (rule == "max") s.reference_rule = ReferenceRule::Max;
  else throw InvalidInput("unknown reference_rule: " + rule);
  s.p_value = kv.getDouble(prefix + "p", s.p_value);
  s.p_min = kv.getDouble(prefix + "p_min", s.p_min);
  const std::string sched = kv.getString(prefix + "p_schedule", "constant");
  if (sched == "adaptive") s.p_schedule = PSchedule::Adaptive;
  else if (sched == "constant") s.p_schedule = PSchedule::Constant;
  else throw InvalidInput("unknown p_schedule: " + sched);
  s.max_window = static_cast<int>(kv.getInt(prefix + "max_window", s.max_window));
  const std::string dir = kv.getString(prefix + "direction", "negsub");
  if (dir == "negsub") s.direction = DirectionKind::NegSubgradient;
  else if (dir == "lbfgs") s.direction = DirectionKind::LbfgsEuclidean;
  else throw InvalidInput("unknown direction: " + dir);
  s.lbfgs_memory = static_cast<int>(kv.getInt(prefix + "lbfgs_memory", s.lbfgs_memory));
  const std::string init = kv.getString(
      prefix + "init_step", s.direction == DirectionKind::LbfgsEuclidean ? "constant" : "bb");
  if (init == "bb") s.init_step = InitStepKind::BarzilaiBorwein;
  else if (init == "constant") s.init_step = InitStepKind::Constant;
  else throw InvalidInput("unknown init_step: " + init);
  s.tau0 = kv.getDouble(prefix + "tau0", s.tau0);
  s.epsilon = kv.getDouble(prefix + "epsilon", global_epsilon);
  const std::string term = kv.getString(prefix + "termination", "auto");
  spec.termination_auto = term == "auto";
  if (term == "both") s.termination = TerminationMode::EuclideanBoth;
  else if (term == "function" || term == "auto") s.termination = TerminationMode::FunctionOnly;
  else throw InvalidInput("unknown termination: " + term);
  spec.solver.max_iter = static_cast<int>(kv.getInt(prefix + "max_iter", s.max_iter));
  s.max_backtracks = static_cast<int>(kv.getInt(prefix + "max_backtracks", s.max_backtracks));

  DcaConfig& d = spec.dca;
  d.rho = kv.getDouble(prefix + "rho", d.rho);
  d.max_iter = static_cast<int>(kv.getInt(prefix + "max_iter", d.max_iter));
  d.epsilon = kv.getDouble(prefix + "epsilon", global_epsilon);
  d.closed_form = kv.getString(prefix + "inner", "closed") == "closed";
  d.inner_max_iter = static_cast<int>(kv.getInt(prefix + "inner_max_iter", d.inner_max_iter));
  d.bdca = spec.kind == "bdca";
  d.lambda_bar = kv.getDouble(prefix + "lambda_bar", d.lambda_bar);
  d.alpha = kv.getDouble(prefix + "alpha", d.alpha);
  d.beta = kv.getDouble(prefix + "beta", d.beta);

  spec.kmeans_max_iter = static_cast<int>(kv.getInt(prefix + "max_iter", spec.kmeans_max_iter));

  if (spec.kind != "subgradient" && spec.kind != "dca" && spec.kind != "bdca" &&
      spec.kind != "skmeans")
    throw InvalidInput("unknown solver kind: " + spec.kind);
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const KeyVal& kv) {
  ExperimentConfig cfg;
  cfg.repetitions = static_cast<int>(kv.getInt("repetitions", 1));
  cfg.restarts = static_cast<int>(kv.getInt("restarts", 1));
  cfg.base_seed = kv.getInt("base_seed", 0);
  cfg.epsilon = kv.getDouble("epsilon", 1e-6);
  cfg.jobs = static_cast<int>(kv.getInt("jobs", 1));
  if (cfg.repetitions < 1) throw InvalidInput("repetitions must be >= 1");
  if (cfg.restarts < 1) throw InvalidInput("restarts must be >= 1");
  if (cfg.jobs < 1) throw InvalidInput("jobs must be >= 1");

  std::vector<std::string> problem_names;
  if (kv.has("problems")) problem_names = kv.getList("problems");
  else problem_names = {""};
  for (const std::string& pname : problem_names) {
    const std::string prefix = pname.empty() ? "problem." : "problem." + pname + ".";
    KeyVal section;
    for (const auto& [k, v] : kv.entries())
      if (k.rfind(prefix, 0) == 0) section.set(k.substr(prefix.size()), v);
    if (!section.has("name")) section.set("name", pname.empty() ? "problem" : pname);
    if (section.entries().empty())
      throw InvalidInput("no keys found for problem section '" + pname + "'");
    cfg.problem_sections.push_back(std::move(section));
  }

  std::vector<std::string> solver_names;
  if (kv.has("solvers")) solver_names = kv.getList("solvers");
  else throw InvalidInput("config needs a 'solvers' list");
  for (const std::string& name : solver_names) {
    for (const SolverSpec& existing : cfg.solvers)
      if (existing.name == name) throw InvalidInput("duplicate solver name: " + name);
    cfg.solvers.push_back(parseSolver(kv, name, cfg.epsilon));
  }
  return cfg;
}

namespace {

struct RunTask {
  int problem_index;
  int solver_index;
  int repetition;
  long seed;
};

std::string sanitize(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
  return s;
}

std::string formatTrace(const std::vector<IterationRecord>& trace) {
  std::ostringstream out;
  out << "k,phi,R,tau,dir_norm,w_norm,backtracks,delta_k,time_s\n";
  out << std::setprecision(17);
  for (const IterationRecord& r : trace)
    out << r.k << "," << r.phi << "," << r.reference << "," << r.tau << "," << r.dir_norm
        << "," << r.w_norm << "," << r.backtracks << "," << r.delta << "," << r.time_s
        << "\n";
  return out.str();
}

RunSummary executeRun(const ProblemInstance& prob, const SolverSpec& spec, int repetition,
                      long seed, int restarts, const std::string& out_dir,
                      std::string* trace_path) {
  RunSummary summary;
  summary.problem = prob.name;
  summary.solver = spec.name;
  summary.repetition = repetition;
  summary.seed = seed;

  Rng rng(static_cast<std::uint64_t>(seed));
  const std::unique_ptr<Objective> objective = prob.makeObjective();

  double best_value = std::numeric_limits<double>::infinity();
  double total_time = 0.0;
  std::vector<int> best_assignments;
  std::optional<SolveResult> best_result;
  std::optional<SphericalKmeansResult> best_kmeans;

  for (int r = 0; r < restarts; ++r) {
    const Blocks x0 = prob.initialPoint(rng);
    if (spec.kind == "skmeans") {
      SphericalKmeansResult res =
          sphericalKmeans(prob.dataset, prob.num_centers, x0, spec.kmeans_max_iter,
                          spec.solver.epsilon);
      total_time += res.wall_time_s;
      if (res.objective < best_value) {
        best_value = res.objective;
        best_kmeans = std::move(res);
      }
    } else if (spec.kind == "dca" || spec.kind == "bdca") {
      const std::unique_ptr<DcProgram> program = prob.makeDcProgram(spec.dca.rho);
      SolveResult res = dcaSolve(*program, x0, spec.dca);
      total_time += res.wallTime();
      if (res.phi_final < best_value) {
        best_value = res.phi_final;
        best_result = std::move(res);
      }
    } else {
      SolverConfig cfg = spec.solver;
      if (spec.termination_auto)
        cfg.termination = objective->domain().isEuclidean() ? TerminationMode::EuclideanBoth
                                                            : TerminationMode::FunctionOnly;
      SolveResult res = solve(*objective, x0, cfg);
      total_time += res.wallTime();
      if (res.phi_final < best_value) {
        best_value = res.phi_final;
        best_result = std::move(res);
      }
    }
  }

  summary.wall_time_s = total_time;
  summary.final_value = best_value;
  if (best_kmeans) {
    summary.status = best_kmeans->converged ? "Converged" : "MaxIter";
    summary.iterations = best_kmeans->iterations;
    best_assignments = best_kmeans->assignments;
  } else {
    summary.status = statusName(best_result->status);
    summary.iterations = best_result->iterations();
    summary.total_backtracks = best_result->totalBacktracks();
    summary.invariant_violations = best_result->invariants.total();
    if (prob.kind != "mds") {
      const auto* clustering = dynamic_cast<const ClusteringObjective*>(objective.get());
      best_assignments = clustering->assign(best_result->x_final);
    }
  }

  if (!best_assignments.empty() && prob.dataset.hasLabels()) {
    Partition pred;
    pred.assignments = best_assignments;
    pred.l = prob.num_centers;
    Partition truth = Partition::fromAssignments(prob.dataset.labels);
    const ClusterScores scores = homogeneityCompletenessV(pred, truth);
    summary.homogeneity = scores.homogeneity;
    summary.completeness = scores.completeness;
    summary.v_measure = scores.v_measure;
    summary.ari = adjustedRandIndex(pred, truth);
  }

  if (!out_dir.empty() && best_result) {
    const std::string fname = sanitize(prob.name) + "__" + sanitize(spec.name) + "__rep" +
                              std::to_string(repetition) + ".trace.csv";
    const std::string path = (std::filesystem::path(out_dir) / fname).string();
    std::ofstream out(path);
    out << formatTrace(best_result->trace);
    if (trace_path) *trace_path = path;
  }
  return summary;
}

}  // namespace

ExperimentResult runExperiment(const ExperimentConfig& config, const std::string& out_dir) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::vector<ProblemInstance> problems;
  problems.reserve(config.problem_sections.size());
  for (const KeyVal& section : config.problem_sections)
    problems.push_back(materializeProblem(section, config.epsilon));

  std::vector<RunTask> tasks;
  for (int p = 0; p < static_cast<int>(problems.size()); ++p)
    for (int s = 0; s < static_cast<int>(config.solvers.size()); ++s)
      for (int r = 0; r < config.repetitions; ++r)
        tasks.push_back({p, s, r, config.base_seed + r});

  ExperimentResult result;
  result.runs.resize(tasks.size());
  result.trace_files.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(tasks.size())));
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const RunTask& t = tasks[i];
      RunSummary& slot = result.runs[i];
      try {
        slot = executeRun(problems[static_cast<std::size_t>(t.problem_index)],
                          config.solvers[static_cast<std::size_t>(t.solver_index)],
                          t.repetition, t.seed, config.restarts, out_dir,
                          &result.trace_files[i]);
      } catch (const std::exception& e) {
        slot.problem = problems[static_cast<std::size_t>(t.problem_index)].name;
        slot.solver = config.solvers[static_cast<std::size_t>(t.solver_index)].name;
        slot.repetition = t.repetition;
        slot.seed = t.seed;
        slot.status = std::string("Error: ") + e.what();
        slot.failed = true;
      }
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }

  if (!out_dir.empty()) {
    std::ofstream summary((std::filesystem::path(out_dir) / "summary.csv").string());
    summary << formatSummaryCsv(result.runs);
    std::ofstream agg((std::filesystem::path(out_dir) / "aggregate.csv").string());
    agg << formatAggregateCsv(config, result.runs);
    KeyVal manifest;
    manifest.set("jobs", std::to_string(jobs));
    manifest.set("base_seed", std::to_string(config.base_seed));
    manifest.set("repetitions", std::to_string(config.repetitions));
    manifest.set("restarts", std::to_string(config.restarts));
    manifest.save((std::filesystem::path(out_dir) / "run.meta").string());
  }
  return result;
}

ProfileTable buildProfileTable(const ExperimentConfig& config, const ExperimentResult& result,
                               bool use_time) {
  ProfileTable table;
  for (const SolverSpec& s : config.solvers) table.solvers.push_back(s.name);

  // Columns are (problem, repetition) instances in task order.
  std::map<std::pair<std::string, int>, Index> column;
  for (const RunSummary& run : result.runs) {
    const auto key = std::make_pair(run.problem, run.repetition);
    if (!column.count(key)) {
      column[key] = static_cast<Index>(table.problems.size());
      table.problems.push_back(run.problem + "#rep" + std::to_string(run.repetition));
    }
  }
  table.costs = Matrix::Constant(static_cast<Index>(table.solvers.size()),
                                 static_cast<Index>(table.problems.size()),
                                 std::numeric_limits<double>::infinity());
  for (const RunSummary& run : result.runs) {
    Index srow = -1;
    for (std::size_t s = 0; s < table.solvers.size(); ++s)
      if (table.solvers[s] == run.solver) srow = static_cast<Index>(s);
    const Index pcol = column.at(std::make_pair(run.problem, run.repetition));
    if (!run.failed && run.converged()) {
      const double cost = use_time ? run.wall_time_s : static_cast<double>(run.iterations);
      table.costs(srow, pcol) = std::max(cost, 1e-9);  // guard zero-time measurements
    }
  }
  return table;
}

std::string formatSummaryCsv(const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  out << "problem,solver,repetition,seed,status,wall_time_s,final_value,iterations,"
         "total_backtracks,homogeneity,completeness,v_measure,ari,invariant_violations\n";
  out << std::setprecision(17);
  for (const RunSummary& r : runs)
    out << r.problem << "," << r.solver << "," << r.repetition << "," << r.seed << ","
        << r.status << "," << r.wall_time_s << "," << r.final_value << "," << r.iterations
        << "," << r.total_backtracks << "," << r.homogeneity << "," << r.completeness << ","
        << r.v_measure << "," << r.ari << "," << r.invariant_violations << "\n";
  return out.str();
}

std::string formatAggregateCsv(const ExperimentConfig& config,
                               const std::vector<RunSummary>& runs) {
  std::ostringstream out;
  out << "problem,solver,runs,converged,wall_time_mean,wall_time_std,value_mean,value_std,"
         "iterations_mean,ari_mean,v_measure_mean,invariant_violations\n";
  out << std::setprecision(17);
  std::set<std::string> problem_names;
  for (const RunSummary& r : runs) problem_names.insert(r.problem);
  for (const std::string& pname : problem_names)
    for (const SolverSpec& solver : config.solvers) {
      std::vector<const RunSummary*> group;
      for (const RunSummary& r : runs)
        if (r.problem == pname && r.solver == solver.name && !r.failed) group.push_back(&r);
      if (group.empty()) continue;
      const double n = static_cast<double>(group.size());
      auto mean = [&](auto f) {
        double s = 0.0;
        for (const RunSummary* r : group) s += f(*r);
        return s / n;
      };
      auto stdev = [&](auto f, double m) {
        if (group.size() < 2) return 0.0;
        double s = 0.0;
        for (const RunSummary* r : group) s += (f(*r) - m) * (f(*r) - m);
        return std::sqrt(s / (n - 1.0));
      };
      const double tmean = mean([](const RunSummary& r) { return r.wall_time_s; });
      const double vmean = mean([](const RunSummary& r) { return r.final_value; });
      int converged = 0;
      long violations = 0;
      for (const RunSummary* r : group) {
        converged += r->converged() ? 1 : 0;
        violations += r->invariant_violations;
      }
      out << pname << "," << solver.name << "," << group.size() << "," << converged << ","
          << tmean << "," << stdev([](const RunSummary& r) { return r.wall_time_s; }, tmean)
          << "," << vmean << "," << stdev([](const RunSummary& r) { return r.final_value; }, vmean)
          << "," << mean([](const RunSummary& r) { return double(r.iterations); }) << ","
          << mean([](const RunSummary& r) { return r.ari; }) << ","
          << mean([](const RunSummary& r) { return r.v_measure; }) << "," << violations << "\n";
    }
  return out.str();
}

}  // namespace nmsub
