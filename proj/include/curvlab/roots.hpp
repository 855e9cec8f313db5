#pragma once

#include <functional>

namespace curvlab {

struct RootResult {
  double x = 0.0;
  int iterations = 0;
};

// Root of a continuous f on [lo, hi] with f(lo), f(hi) of opposite sign.
// Secant steps are taken while they stay inside the bracket and shrink it
// fast enough; otherwise the step is a bisection.
RootResult bisect_secant(const std::function<double(double)>& f, double lo, double hi,
                         double xtol = 1e-15, int max_iter = 400);

} // namespace curvlab
