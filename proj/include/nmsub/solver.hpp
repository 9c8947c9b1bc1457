#pragma once

#include "nmsub/objectives.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <string>
#include <vector>

namespace nmsub {

enum class DirectionKind { NegSubgradient, LbfgsEuclidean };
enum class InitStepKind { Constant, BarzilaiBorwein };
enum class ReferenceRule { Monotone, Mean, Max };
enum class PSchedule { Constant, Adaptive };
enum class TerminationMode { EuclideanBoth, FunctionOnly };

struct SolverConfig {
  double sigma = 1e-4;    // Armijo-type slope fraction, in (0,1)
  double beta = 0.5;      // backtracking shrink factor, in (0,1)
  double tau_min = 1e-10;
  double tau_max = 1e10;

  ReferenceRule reference_rule = ReferenceRule::Mean;
  double p_value = 0.6;   // mean-rule weight of the new function value
  double p_min = 0.1;     // lower bound for adaptive p, in (0,1]
  PSchedule p_schedule = PSchedule::Constant;
  int max_window = 5;     // max-rule window length m

  DirectionKind direction = DirectionKind::NegSubgradient;
  int lbfgs_memory = 5;

  InitStepKind init_step = InitStepKind::BarzilaiBorwein;
  double tau0 = 1.0;      // first / constant initial trial stepsize

  double epsilon = 1e-6;
  TerminationMode termination = TerminationMode::FunctionOnly;
  int max_iter = 1000;
  int max_backtracks = 60;
  double stationarity_tol = 1e-12;

  void validate(const Manifold& domain) const;  // throws InvalidInput
};

struct IterationRecord {
  int k = 0;
  double phi = 0.0;      // phi(x^{k+1})
  double reference = 0.0;  // R_{k+1}
  double tau = 0.0;      // accepted stepsize
  double dir_norm = 0.0;
  double w_norm = 0.0;   // projected subgradient norm
  int backtracks = 0;
  double delta = 0.0;    // -sigma tau_k <w_M, d_k>
  double time_s = 0.0;   // monotonic seconds since solve start
};

enum class SolveStatus { Converged, MaxIter, StationaryZeroSubgradient, LinesearchStalled };

const char* statusName(SolveStatus s);

/// Per-invariant violation counters filled while the solver runs. The checks
/// mirror the guarantees of the method: the linesearch acceptance inequality,
/// the reference-value sandwich, monotonicity of R_k, nonnegativity of
/// delta_k, and the finite-horizon telescoping bound.
struct InvariantReport {
  std::map<std::string, int> violations;
  std::map<std::string, double> worst_residual;

  void record(const std::string& name, double residual, double tol);
  int total() const;
  std::string summary() const;
};

struct SolveResult {
  Blocks x_final;
  double phi_final = 0.0;
  SolveStatus status = SolveStatus::MaxIter;
  std::vector<IterationRecord> trace;
  InvariantReport invariants;

  long totalBacktracks() const;
  double wallTime() const { return trace.empty() ? 0.0 : trace.back().time_s; }
  int iterations() const { return static_cast<int>(trace.size()); }
};

/// Nonmonotone subgradient descent over an embedded submanifold. Each
/// iteration projects an ambient subgradient onto the tangent space, takes a
/// direction, backtracks against the reference value R_k and retracts; R_k is
/// then updated by the configured monotone / mean / max rule.
SolveResult solve(const Objective& objective, const Blocks& x0, const SolverConfig& config);

/// Mean rule R_{k+1} = (1 - p) R_k + p phi_next, evaluated as
/// R_k - p (R_k - phi_next) so the update can never round upward past R_k;
/// p = 1 returns phi_next exactly.
double referenceUpdateMean(double reference, double phi_next, double p_next);

/// Max rule over the most recent min(k+1, m) function values.
double referenceUpdateMax(const std::deque<double>& window);

/// Initial trial stepsize <dx, dx>/<dx, dg>, clamped to [tau_min, tau_max],
/// with dg = w_curr - proj_{T_x}(w_prev); falls back to tau_max when the
/// curvature estimate degenerates.
double initialStepBb(const Blocks& dx, const Blocks& w_prev, const Blocks& w_curr,
                     const Manifold& manifold, const Blocks& x_curr, double tau_min,
                     double tau_max);

struct TerminationInput {
  double x_step_norm = 0.0;   // ||x^k - x^{k-1}||, ambient
  double x_prev_norm = 0.0;   // ||x^{k-1}||
  double phi_curr = 0.0;
  double phi_prev = 0.0;
};

/// Relative-change stopping test; EuclideanBoth also requires the iterate
/// change to settle.
bool terminationCheck(const TerminationInput& in, TerminationMode mode, double epsilon);

/// Self-adaptive stepsize/nonmonotonicity schedule: two consecutive clean
/// accepts raise the initial trial stepsize and aim for monotone decrease
/// (p = 1); a backtracking event lowers it and allows more nonmonotonicity
/// (p = p_min).
struct AdaptiveSchedule {
  double p;
  double tau0;
  int clean_accepts = 0;

  void update(int backtracks, const SolverConfig& cfg) {
    if (backtracks > 0) {
      clean_accepts = 0;
      tau0 = std::max(cfg.beta * tau0, cfg.tau_min);
      p = cfg.p_min;
      return;
    }
    ++clean_accepts;
    if (clean_accepts >= 2) {
      tau0 = std::min(tau0 / cfg.beta, cfg.tau_max);
      p = 1.0;
    }
  }
};

/// L-BFGS two-loop recursion state (Euclidean domains only). Pairs with
/// nonpositive or negligible curvature are skipped.
class LbfgsMemory {
 public:
  explicit LbfgsMemory(int capacity) : capacity_(capacity) {}
  void push(const Vector& s, const Vector& y);
  Vector applyInverseHessian(const Vector& g) const;
  int size() const { return static_cast<int>(pairs_.size()); }

 private:
  struct Pair {
    Vector s, y;
    double sy;
  };
  int capacity_;
  std::deque<Pair> pairs_;
};

}  // namespace nmsub
