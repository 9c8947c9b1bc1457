#include "nmsub/dca.hpp"

#include "nmsub/geometry.hpp"

#include <chrono>
#include <cmath>

namespace nmsub {

namespace {

/// Inner solver for argmin g(x) - <y, x> when closed_form is disabled:
/// the subproblem is smooth and strongly convex, so a monotone L-BFGS run
/// of the descent method is exact enough at tight tolerance.
class LinearizedSubproblem : public Objective {
 public:
  LinearizedSubproblem(const DcProgram& program, const Blocks& y)
      : program_(program), y_(y) {}

  const Manifold& domain() const override { return program_.objective().domain(); }

  double value(const Blocks& x) const override {
    return program_.evaluateDc(x).g_value - blocks::dot(y_, x);
  }

  Evaluation evaluate(const Blocks& x) const override {
    DcEvaluation dc = program_.evaluateDc(x);
    Evaluation out;
    out.value = dc.g_value - blocks::dot(y_, x);
    out.subgradient = dc.g_gradient;
    blocks::axpy(-1.0, y_, out.subgradient);
    return out;
  }

 private:
  const DcProgram& program_;
  const Blocks& y_;
};

}  // namespace

void DcaConfig::validate() const {
  if (rho <= 0.0) throw InvalidInput("dca: rho must be > 0");
  if (max_iter < 1) throw InvalidInput("dca: max_iter must be >= 1");
  if (epsilon <= 0.0) throw InvalidInput("dca: epsilon must be positive");
  if (inner_max_iter < 1) throw InvalidInput("dca: inner_max_iter must be >= 1");
  if (lambda_bar <= 0.0) throw InvalidInput("bdca: lambda_bar must be > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("bdca: alpha must be in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw InvalidInput("bdca: beta must be in (0,1)");
}

SolveResult dcaSolve(const DcProgram& program, const Blocks& x0, const DcaConfig& config) {
  config.validate();
  const Objective& phi = program.objective();
  geometry::checkShapes(phi.domain(), x0, "dcaSolve(x0)");

  const auto t_start = std::chrono::steady_clock::now();
  const auto elapsed = [&t_start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  };

  SolveResult result;
  Blocks x = x0;
  double value = phi.value(x);
  result.status = SolveStatus::MaxIter;

  for (int k = 0; k < config.max_iter; ++k) {
    const DcEvaluation dc = program.evaluateDc(x);

    Blocks y_hat;
    if (config.closed_form) {
      y_hat = program.argminLinearized(dc.h_subgradient);
    } else {
      LinearizedSubproblem sub(program, dc.h_subgradient);
      SolverConfig inner;
      inner.reference_rule = ReferenceRule::Monotone;
      inner.direction = DirectionKind::LbfgsEuclidean;
      inner.init_step = InitStepKind::Constant;
      inner.termination = TerminationMode::EuclideanBoth;
      inner.epsilon = 1e-12;
      inner.max_iter = config.inner_max_iter;
      y_hat = solve(sub, x, inner).x_final;
    }
    // First-order condition of the subproblem, grad g(x+) = y^k.
    {
      const DcEvaluation at_hat = program.evaluateDc(y_hat);
      Blocks foc = at_hat.g_gradient;
      blocks::axpy(-1.0, dc.h_subgradient, foc);
      result.invariants.record("dca_first_order", blocks::norm(foc),
                               config.closed_form ? 1e-8 : 1e-4);
    }

    const double value_hat = phi.value(y_hat);
    result.invariants.record("dca_descent", value_hat - value, 1e-10);

    const Blocks step = blocks::difference(y_hat, x);
    const double step_norm = blocks::norm(step);

    double lambda = 0.0;
    double value_next = value_hat;
    Blocks x_next = y_hat;
    if (config.bdca && step_norm > 0.0) {
      double trial = config.lambda_bar;
      for (int b = 0; b <= config.max_backtracks; ++b) {
        Blocks cand = y_hat;
        blocks::axpy(trial, step, cand);
        const double cand_value = phi.value(cand);
        if (cand_value <= value_hat - config.alpha * trial * trial * step_norm * step_norm) {
          lambda = trial;
          value_next = cand_value;
          x_next = std::move(cand);
          break;
        }
        trial *= config.beta;
      }
      result.invariants.record("bdca_chain", value_next - value_hat, 1e-10);
    }

    const double value_prev = value;
    const Blocks x_prev = x;
    x = std::move(x_next);
    value = value_next;

    IterationRecord rec;
    rec.k = k;
    rec.phi = value;
    rec.reference = value;
    rec.tau = lambda;
    rec.dir_norm = step_norm;
    rec.w_norm = blocks::norm(dc.h_subgradient);
    rec.backtracks = 0;
    rec.delta = value_prev - value;
    rec.time_s = elapsed();
    result.trace.push_back(rec);

    TerminationInput term;
    term.x_step_norm = blocks::norm(blocks::difference(x, x_prev));
    term.x_prev_norm = blocks::norm(x_prev);
    term.phi_curr = value;
    term.phi_prev = value_prev;
    if (terminationCheck(term, TerminationMode::EuclideanBoth, config.epsilon)) {
      result.status = SolveStatus::Converged;
      break;
    }
  }

  result.x_final = std::move(x);
  result.phi_final = value;
  return result;
}

}  // namespace nmsub
