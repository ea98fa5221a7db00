#pragma once

#include <functional>

namespace gibbsnet {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

// Adaptive Simpson on [a, b] with interval bisection until the Richardson
// error estimate of every leaf is below its share of abs_tol. Throws
// QuadratureError if max_depth is reached before the tolerance is met.
QuadratureResult adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                                  double abs_tol, int max_depth = 50);

}  // namespace gibbsnet
