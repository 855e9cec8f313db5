#include "curvlab/roots.hpp"

#include "curvlab/errors.hpp"

#include <cmath>
#include <string>

namespace curvlab {

RootResult bisect_secant(const std::function<double(double)>& f, double lo, double hi,
                         double xtol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return {lo, 0};
  if (fhi == 0.0) return {hi, 0};
  if (std::signbit(flo) == std::signbit(fhi))
    throw SolverError("root not bracketed on [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");

  bool last_was_secant = false;
  for (int it = 1; it <= max_iter; ++it) {
    double x = 0.5 * (lo + hi);
    // Two secant steps in a row are not allowed; that prevents the one-sided
    // stagnation regula falsi is known for.
    if (!last_was_secant) {
      const double xs = hi - fhi * (hi - lo) / (fhi - flo);
      if (std::isfinite(xs) && xs > lo && xs < hi) {
        x = xs;
        last_was_secant = true;
      }
    } else {
      last_was_secant = false;
    }
    const double fx = f(x);
    if (fx == 0.0) return {x, it};
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= xtol * (1.0 + std::abs(x)) || mid == lo || mid == hi)
      return {std::abs(flo) < std::abs(fhi) ? lo : hi, it};
  }
  return {std::abs(flo) < std::abs(fhi) ? lo : hi, max_iter};
}

} // namespace curvlab
