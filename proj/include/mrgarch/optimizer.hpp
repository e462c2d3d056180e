#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mrgarch/corr_map.hpp"

namespace mrg {

struct OptimizerOptions {
  double fd_step = 1e-6;          // relative forward-difference step
  double f_tolerance = 1e-8;      // relative objective improvement ...
  int f_tolerance_window = 5;     // ... summed over this many accepted steps
  double x_tolerance = 1e-9;      // max-norm of an accepted step
  int max_iterations = 500;
  double max_initial_move = 0.05; // max coordinate move on the first step
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  int iterations = 0;
  long evaluations = 0;
  double gradient_norm = 0.0;  // max-norm of the last finite-difference gradient
  std::string termination;
  std::vector<double> trace;  // objective after each accepted step, starting at x0
};

/// Maximizes `f` with BFGS on forward finite-difference gradients and an
/// Armijo backtracking line search. `f` may return a large negative penalty
/// for points outside its domain; the line search backs off from those.
/// The objective trace is non-decreasing.
OptimizerResult maximize_bfgs(const std::function<double(const Vector&)>& f, const Vector& x0,
                              const OptimizerOptions& opts = {});

}  // namespace mrg
