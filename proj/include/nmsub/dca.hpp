#pragma once

#include "nmsub/objectives.hpp"
#include "nmsub/solver.hpp"

namespace nmsub {

struct DcaConfig {
  double rho = 1e-3;      // strong-convexity shift of both DC parts
  int max_iter = 500;
  double epsilon = 1e-6;
  bool closed_form = true;     // closed-form subproblems; false runs an inner descent
  int inner_max_iter = 200;

  bool bdca = false;           // extrapolation linesearch after each DCA step
  double lambda_bar = 2.0;     // first trial extrapolation length
  double alpha = 1e-4;         // sufficient-decrease constant
  double beta = 0.5;           // extrapolation shrink factor
  int max_backtracks = 60;

  void validate() const;
};

/// Classical difference-of-convex algorithm: linearize h at x^k and minimize
/// the convex surrogate. With bdca enabled, each step additionally searches
/// along d = y_hat - x^k for phi(y_hat + lambda d) <= phi(y_hat) -
/// alpha lambda^2 ||d||^2, falling back to lambda = 0.
///
/// Trace-field semantics here: tau is the accepted extrapolation lambda,
/// w_norm the norm of the h-subgradient, dir_norm the DCA step length.
SolveResult dcaSolve(const DcProgram& program, const Blocks& x0, const DcaConfig& config);

}  // namespace nmsub
