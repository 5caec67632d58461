#pragma once

#include <functional>
#include <vector>

namespace qsq {

struct NelderMeadOptions {
  double initial_step = 0.3;
  double f_tol = 1e-15;   // absolute spread of simplex values
  double x_tol = 1e-11;   // simplex diameter
  int max_evaluations = 40000;
  /// Re-seed the simplex at the incumbent this many times after convergence.
  int restarts = 2;
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Derivative-free simplex minimisation (standard reflection/expansion/contraction/shrink).
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& objective,
                             std::vector<double> start, const NelderMeadOptions& options = {});

}  // namespace qsq
