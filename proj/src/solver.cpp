#include "nmsub/solver.hpp"

#include "nmsub/geometry.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace nmsub {

void SolverConfig::validate(const Manifold& domain) const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw InvalidInput("solver: sigma must be in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("solver: beta must be in (0,1)");
  if (!(tau_min > 0.0 && tau_min <= tau_max))
    throw InvalidInput("solver: requires 0 < tau_min <= tau_max");
  if (!(p_min > 0.0 && p_min <= 1.0)) throw InvalidInput("solver: p_min must be in (0,1]");
  if (reference_rule == ReferenceRule::Mean && (p_value < p_min || p_value > 1.0))
    throw InvalidInput("solver: mean rule requires p in [p_min, 1]");
  if (reference_rule == ReferenceRule::Max && max_window < 1)
    throw InvalidInput("solver: max rule window must be >= 1");
  if (lbfgs_memory < 1) throw InvalidInput("solver: lbfgs memory must be >= 1");
  if (tau0 <= 0.0) throw InvalidInput("solver: tau0 must be positive");
  if (epsilon <= 0.0) throw InvalidInput("solver: epsilon must be positive");
  if (max_iter < 1) throw InvalidInput("solver: max_iter must be >= 1");
  if (max_backtracks < 1) throw InvalidInput("solver: max_backtracks must be >= 1");
  if (direction == DirectionKind::LbfgsEuclidean && !domain.isEuclidean())
    throw InvalidInput("solver: L-BFGS direction requires a Euclidean domain");
  if (termination == TerminationMode::EuclideanBoth && !domain.isEuclidean())
    throw InvalidInput("solver: EuclideanBoth termination requires a Euclidean domain");
}

const char* statusName(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIter: return "MaxIter";
    case SolveStatus::StationaryZeroSubgradient: return "StationaryZeroSubgradient";
    case SolveStatus::LinesearchStalled: return "LinesearchStalled";
  }
  return "?";
}

void InvariantReport::record(const std::string& name, double residual, double tol) {
  double& worst = worst_residual[name];
  worst = std::max(worst, residual);
  if (residual > tol) violations[name] += 1;
}

int InvariantReport::total() const {
  int n = 0;
  for (const auto& [name, count] : violations) n += count;
  return n;
}

std::string InvariantReport::summary() const {
  std::ostringstream out;
  for (const auto& [name, count] : violations)
    if (count > 0) out << name << ":" << count << " ";
  const std::string s = out.str();
  return s.empty() ? "none" : s;
}

long SolveResult::totalBacktracks() const {
  long n = 0;
  for (const IterationRecord& r : trace) n += r.backtracks;
  return n;
}

double referenceUpdateMean(double reference, double phi_next, double p_next) {
  if (p_next == 1.0) return phi_next;
  return reference - p_next * (reference - phi_next);
}

double referenceUpdateMax(const std::deque<double>& window) {
  return *std::max_element(window.begin(), window.end());
}

double initialStepBb(const Blocks& dx, const Blocks& w_prev, const Blocks& w_curr,
                     const Manifold& manifold, const Blocks& x_curr, double tau_min,
                     double tau_max) {
  const Blocks transported = geometry::tangentProject(manifold, x_curr, w_prev);
  const Blocks dg = blocks::difference(w_curr, transported);
  const double num = blocks::dot(dx, dx);
  const double den = blocks::dot(dx, dg);
  if (den <= 1e-18 * num) return tau_max;
  return std::clamp(num / den, tau_min, tau_max);
}

bool terminationCheck(const TerminationInput& in, TerminationMode mode, double epsilon) {
  const double rel_phi =
      std::abs(in.phi_curr - in.phi_prev) / std::max(std::abs(in.phi_prev), 1.0);
  if (mode == TerminationMode::FunctionOnly) return rel_phi <= epsilon;
  const double rel_x = in.x_step_norm / std::max(in.x_prev_norm, 1.0);
  return std::max(rel_x, rel_phi) <= epsilon;
}

void LbfgsMemory::push(const Vector& s, const Vector& y) {
  const double sy = s.dot(y);
  if (sy <= 1e-10 * s.norm() * y.norm()) return;  // cautious update: skip the pair
  pairs_.push_back({s, y, sy});
  if (static_cast<int>(pairs_.size()) > capacity_) pairs_.pop_front();
}

Vector LbfgsMemory::applyInverseHessian(const Vector& g) const {
  Vector q = g;
  std::vector<double> alpha(pairs_.size());
  for (std::size_t i = pairs_.size(); i-- > 0;) {
    alpha[i] = pairs_[i].s.dot(q) / pairs_[i].sy;
    q -= alpha[i] * pairs_[i].y;
  }
  if (!pairs_.empty()) {
    const Pair& last = pairs_.back();
    q *= last.sy / last.y.squaredNorm();
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const double b = pairs_[i].y.dot(q) / pairs_[i].sy;
    q += (alpha[i] - b) * pairs_[i].s;
  }
  return q;
}

SolveResult solve(const Objective& objective, const Blocks& x0, const SolverConfig& config) {
  const Manifold& manifold = objective.domain();
  config.validate(manifold);
  geometry::checkShapes(manifold, x0, "solve(x0)");
  if (!geometry::onManifold(manifold, x0))
    throw InvalidInput("solve: x0 fails the manifold membership check");

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  SolveResult result;
  Blocks x = x0;
  Evaluation eval = objective.evaluate(x);
  double phi = eval.value;
  double reference = phi;  // R_0 = phi(x^0)
  const double reference0 = reference;

  std::deque<double> window{phi};  // max-rule history
  AdaptiveSchedule adaptive{config.p_value, config.tau0, 0};

  Blocks prev_x;            // x^{k-1}
  Blocks prev_w_ambient;    // ambient subgradient at x^{k-1}
  bool have_prev = false;

  LbfgsMemory lbfgs(config.lbfgs_memory);
  // Running minimum of tau_j^2 ||d^j||^2 and the worst direction-quality
  // constant a_j = -<w, d>/||d||^2, both for the telescoping bound.
  double min_step_sq = std::numeric_limits<double>::infinity();
  double a_min = std::numeric_limits<double>::infinity();

  result.status = SolveStatus::MaxIter;
  for (int k = 0; k < config.max_iter; ++k) {
    const Blocks w_projected = geometry::tangentProject(manifold, x, eval.subgradient);
    const double w_norm = blocks::norm(w_projected);
    if (w_norm <= config.stationarity_tol) {
      result.status = SolveStatus::StationaryZeroSubgradient;
      break;
    }

    // Direction; L-BFGS falls back to the negative subgradient whenever the
    // curvature condition <w, d> <= -a ||d||^2 degenerates.
    Blocks direction;
    if (config.direction == DirectionKind::LbfgsEuclidean && lbfgs.size() > 0) {
      const Vector d = -lbfgs.applyInverseHessian(blocks::flatten(w_projected));
      direction = blocks::unflatten(d, w_projected);
      const double dn2 = blocks::squaredNorm(direction);
      const double slope = blocks::dot(w_projected, direction);
      if (!(dn2 > 0.0) || -slope / dn2 < 1e-8) direction = blocks::scaled(w_projected, -1.0);
    } else {
      direction = blocks::scaled(w_projected, -1.0);
    }
    const double dir_norm = blocks::norm(direction);
    const double slope = blocks::dot(w_projected, direction);  // <w_M, d> < 0

    double tau = adaptive.tau0;
    if (config.init_step == InitStepKind::BarzilaiBorwein && have_prev) {
      const Blocks dx = blocks::difference(x, prev_x);
      tau = initialStepBb(dx, prev_w_ambient, eval.subgradient, manifold, x, config.tau_min,
                          config.tau_max);
    }
    tau = std::clamp(tau, config.tau_min, config.tau_max);

    // Backtracking against the reference value.
    int backtracks = 0;
    Blocks candidate = geometry::retract(manifold, x, blocks::scaled(direction, tau));
    double phi_candidate = objective.value(candidate);
    bool stalled = false;
    while (phi_candidate > reference + config.sigma * tau * slope) {
      if (++backtracks > config.max_backtracks) {
        stalled = true;
        break;
      }
      tau *= config.beta;
      candidate = geometry::retract(manifold, x, blocks::scaled(direction, tau));
      phi_candidate = objective.value(candidate);
    }
    if (stalled) {
      result.status = SolveStatus::LinesearchStalled;
      break;
    }

    prev_x = x;
    prev_w_ambient = eval.subgradient;
    have_prev = true;

    x = std::move(candidate);
    eval = objective.evaluate(x);
    const double phi_prev = phi;
    // Keep the value the linesearch actually compared; evaluate() is only
    // needed for the subgradient at the accepted point.
    phi = phi_candidate;

    const double delta = -config.sigma * tau * slope;
    double p_next = 1.0;
    const double reference_prev = reference;
    switch (config.reference_rule) {
      case ReferenceRule::Monotone:
        reference = phi;
        break;
      case ReferenceRule::Mean:
        if (config.p_schedule == PSchedule::Adaptive) adaptive.update(backtracks, config);
        p_next = config.p_schedule == PSchedule::Adaptive ? adaptive.p : config.p_value;
        reference = referenceUpdateMean(reference, phi, p_next);
        break;
      case ReferenceRule::Max:
        window.push_back(phi);
        while (static_cast<int>(window.size()) > config.max_window) window.pop_front();
        reference = referenceUpdateMax(window);
        break;
    }

    // Runtime invariants. The acceptance inequality is the loop's own exit
    // condition; the sandwich and telescoping bounds are specific to the
    // monotone/mean reference rules.
    result.invariants.record("acceptance",
                             phi - (reference_prev + config.sigma * tau * slope), 0.0);
    result.invariants.record("delta_nonneg", -delta, 0.0);
    result.invariants.record("reference_monotone", reference - reference_prev, 1e-12);
    result.invariants.record("reference_bounds_phi", phi - reference, 1e-12);
    if (config.reference_rule != ReferenceRule::Max) {
      const double p_used = config.reference_rule == ReferenceRule::Monotone ? 1.0 : p_next;
      result.invariants.record("sandwich_lower",
                               phi + (1.0 - p_used) * delta - reference, 1e-10);
      result.invariants.record("sandwich_upper",
                               reference - (reference_prev - p_used * delta), 1e-10);
      const double p_floor =
          config.reference_rule == ReferenceRule::Monotone ? 1.0 : config.p_min;
      min_step_sq = std::min(min_step_sq, tau * tau * dir_norm * dir_norm);
      a_min = std::min(a_min, -slope / (dir_norm * dir_norm));
      const double bound = (reference0 - reference) * config.tau_max /
                           (static_cast<double>(k + 1) * p_floor * config.sigma * a_min);
      result.invariants.record("telescoping_bound", min_step_sq - bound, 1e-10);
    }

    if (config.direction == DirectionKind::LbfgsEuclidean) {
      lbfgs.push(blocks::flatten(blocks::difference(x, prev_x)),
                 blocks::flatten(blocks::difference(eval.subgradient, prev_w_ambient)));
    }

    IterationRecord rec;
    rec.k = k;
    rec.phi = phi;
    rec.reference = reference;
    rec.tau = tau;
    rec.dir_norm = dir_norm;
    rec.w_norm = w_norm;
    rec.backtracks = backtracks;
    rec.delta = delta;
    rec.time_s = elapsed();
    result.trace.push_back(rec);

    TerminationInput term;
    term.x_step_norm = blocks::norm(blocks::difference(x, prev_x));
    term.phi_curr = phi;
    term.phi_prev = phi_prev;
    term.x_prev_norm = blocks::norm(prev_x);
    if (terminationCheck(term, config.termination, config.epsilon)) {
      result.status = SolveStatus::Converged;
      break;
    }
    // The method guarantees x^{k+1} != x^k while it keeps iterating.
    result.invariants.record("iterate_moved", term.x_step_norm > 0.0 ? 0.0 : 1.0, 0.5);
  }

  result.x_final = std::move(x);
  result.phi_final = phi;
  return result;
}

}  // namespace nmsub
