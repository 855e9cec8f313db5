#include "curvlab/conformal.hpp"

#include "curvlab/errors.hpp"
#include "curvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;

bool power_of_two(int n) { return n >= 2 && (n & (n - 1)) == 0; }

void check_same_grid(const TorusField& a, const TorusField& b, const char* what) {
  if (a.n1 != b.n1 || a.n2 != b.n2 || a.L1 != b.L1 || a.L2 != b.L2)
    throw ValidationError(std::string("grid mismatch in ") + what);
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

double functional(const TorusSpectral& sp, const TorusField& eta, const TorusField& F) {
  double pot = 0.0;
  for (size_t k = 0; k < eta.values.size(); ++k) pot += F.values[k] * std::exp(eta.values[k]);
  return 0.5 * sp.dirichlet_integral(eta.values) - 2.0 * pot * eta.cell_area();
}

double residual(const TorusSpectral& sp, const TorusField& eta, const TorusField& F) {
  const std::vector<double> lap = sp.laplacian(eta.values);
  double r = 0.0;
  for (size_t k = 0; k < lap.size(); ++k) r = std::max(r, std::abs(-lap[k] - 2.0 * F.values[k] * std::exp(eta.values[k])));
  return r;
}

double weighted_mass(const TorusField& eta, const TorusField& F) {
  double s = 0.0;
  for (size_t k = 0; k < eta.values.size(); ++k) s += F.values[k] * std::exp(eta.values[k]);
  return s * eta.cell_area();
}

// One step; returns false if the new state is not finite.
bool advance(const TorusSpectral& sp, const TorusField& F, FlowScheme scheme, double dt, const std::vector<double>& eta,
             std::vector<double>& out) {
  const size_t n = eta.size();
  std::vector<double> src(n);
  for (size_t k = 0; k < n; ++k) src[k] = 2.0 * F.values[k] * std::exp(eta[k]);
  if (scheme == FlowScheme::semi_implicit) {
    auto e = sp.forward(eta);
    const auto s = sp.forward(src);
    const auto& k2 = sp.k_squared();
    for (size_t k = 0; k < e.size(); ++k) e[k] = (e[k] + dt * s[k]) / (1.0 + dt * k2[k]);
    out = sp.inverse(e);
  } else {
    const std::vector<double> lap = sp.laplacian(eta);
    out.resize(n);
    for (size_t k = 0; k < n; ++k) out[k] = eta[k] + dt * (lap[k] + src[k]);
  }
  for (double x : out)
    if (!std::isfinite(x)) return false;
  return true;
}

double explicit_dt_limit(const TorusSpectral& sp) {
  const auto& k2 = sp.k_squared();
  return 2.0 / *std::max_element(k2.begin(), k2.end());
}

} // namespace

TorusField TorusField::sample(int n1, int n2, double L1, double L2, const std::function<double(double, double)>& f) {
  TorusField t;
  t.n1 = n1, t.n2 = n2, t.L1 = L1, t.L2 = L2;
  t.validate("sampled field");
  t.values.resize(static_cast<size_t>(n1) * n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j) t.values[i * n2 + j] = f(t.x(i), t.y(j));
  return t;
}

TorusField TorusField::constant(int n1, int n2, double L1, double L2, double c) {
  return sample(n1, n2, L1, L2, [c](double, double) { return c; });
}

double TorusField::mean() const { return sum(values) / values.size(); }

void TorusField::validate(const char* what) const {
  if (!power_of_two(n1) || !power_of_two(n2))
    throw ValidationError(std::string(what) + ": sample counts must be powers of two, got " + std::to_string(n1) + " x " +
                          std::to_string(n2));
  if (!(L1 > 0) || !(L2 > 0)) throw ValidationError(std::string(what) + ": torus sides must be positive");
  if (!values.empty() && values.size() != static_cast<size_t>(n1) * n2)
    throw ValidationError(std::string(what) + ": sample count does not match the grid");
}

PlanarField PlanarField::sample(int nx, int ny, double x0, double y0, double h,
                                const std::function<double(double, double)>& f) {
  if (nx < 3 || ny < 3 || !(h > 0)) throw ValidationError("planar grid needs at least 3x3 nodes and h > 0");
  PlanarField p{nx, ny, x0, y0, h, std::vector<double>(static_cast<size_t>(nx) * ny)};
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) p.values[i * ny + j] = f(x0 + i * h, y0 + j * h);
  return p;
}

TorusField gauss_curvature_conformal(const TorusField& eta) {
  eta.validate("conformal exponent");
  for (double x : eta.values)
    if (!std::isfinite(x)) throw ValidationError("conformal exponent has non-finite samples");
  TorusSpectral sp(eta.n1, eta.n2, eta.L1, eta.L2);
  TorusField K = eta;
  const auto lap = sp.laplacian(eta.values);
  for (size_t k = 0; k < lap.size(); ++k) K.values[k] = -0.5 * std::exp(-eta.values[k]) * lap[k];
  return K;
}

PlanarField gauss_curvature_conformal(const PlanarField& eta) {
  for (double x : eta.values)
    if (!std::isfinite(x)) throw ValidationError("conformal exponent has non-finite samples");
  PlanarField K = eta;
  const int ny = eta.ny;
  const double ih2 = 1.0 / (eta.h * eta.h);
  for (int i = 0; i < eta.nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const int k = i * ny + j;
      if (i == 0 || j == 0 || i == eta.nx - 1 || j == ny - 1) {
        K.values[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto& v = eta.values;
      const double lap = (v[k - ny] + v[k + ny] + v[k - 1] + v[k + 1] - 4.0 * v[k]) * ih2;
      K.values[k] = -0.5 * std::exp(-v[k]) * lap;
    }
  return K;
}

double gauss_curvature_conformal(const std::function<double(double, double)>& eta, double x, double y, double h) {
  if (!(h > 0)) throw ValidationError("difference step must be positive");
  const double c = eta(x, y);
  if (!std::isfinite(c)) throw ValidationError("conformal exponent is not finite at the evaluation point");
  auto d2 = [&](double ex, double ey) {
    return (-eta(x + 2 * h * ex, y + 2 * h * ey) + 16.0 * eta(x + h * ex, y + h * ey) - 30.0 * c +
            16.0 * eta(x - h * ex, y - h * ey) - eta(x - 2 * h * ex, y - 2 * h * ey)) /
           (12.0 * h * h);
  };
  return -0.5 * std::exp(-c) * (d2(1, 0) + d2(0, 1));
}

GaussBonnetConstraint gauss_bonnet_constraint(const TorusField& F, const TorusField& eta, int genus) {
  check_same_grid(F, eta, "Gauss-Bonnet constraint");
  if (genus < 0) throw ValidationError("genus must be non-negative");
  return {weighted_mass(eta, F), 2.0 * pi * (2 - 2 * genus)};
}

double nirenberg_functional(const TorusField& eta, const TorusField& F) {
  check_same_grid(F, eta, "functional");
  eta.validate("conformal exponent");
  TorusSpectral sp(eta.n1, eta.n2, eta.L1, eta.L2);
  return functional(sp, eta, F);
}

TorusField flow_velocity(const TorusField& eta, const TorusField& F) {
  check_same_grid(F, eta, "flow velocity");
  TorusSpectral sp(eta.n1, eta.n2, eta.L1, eta.L2);
  TorusField out = eta;
  out.values = sp.laplacian(eta.values);
  for (size_t k = 0; k < out.values.size(); ++k) out.values[k] += 2.0 * F.values[k] * std::exp(eta.values[k]);
  return out;
}

double stationary_residual(const TorusField& eta, const TorusField& F) {
  check_same_grid(F, eta, "stationary residual");
  TorusSpectral sp(eta.n1, eta.n2, eta.L1, eta.L2);
  return residual(sp, eta, F);
}

FlowResult heat_flow(const TorusField& F, const TorusField& eta0, double dt, int steps, const FlowOptions& opts) {
  check_same_grid(F, eta0, "heat flow");
  eta0.validate("initial exponent");
  if (!(dt > 0)) throw ValidationError("time step must be positive");
  if (steps < 0) throw ValidationError("step count must be non-negative");
  if (opts.record_every < 1) throw ValidationError("record_every must be at least 1");
  TorusSpectral sp(eta0.n1, eta0.n2, eta0.L1, eta0.L2);
  if (opts.scheme == FlowScheme::explicit_euler && dt > explicit_dt_limit(sp))
    throw ValidationError("explicit scheme unstable: dt = " + std::to_string(dt) + " exceeds " +
                          std::to_string(explicit_dt_limit(sp)));

  FlowResult res{{}, 0, 0, false, 0.0};
  TorusField eta = eta0;
  double t = 0.0, I = functional(sp, eta, F);
  res.trajectory.push_back({eta, t, I});
  std::vector<double> next;
  double h = dt;
  for (int step = 1; step <= steps; ++step) {
    double I_next = 0.0;
    int halvings = 0;
    for (;;) {
      const bool finite = advance(sp, F, opts.scheme, h, eta.values, next);
      if (!finite || max_abs(next) > opts.blowup_cap)
        throw SolverError("heat flow diverged at step " + std::to_string(step) + " (t = " + std::to_string(t + h) +
                          "): max|eta| exceeded the cap " + std::to_string(opts.blowup_cap));
      TorusField trial = eta;
      trial.values = next;
      I_next = functional(sp, trial, F);
      if (I_next <= I + opts.monotone_slack * std::max(1.0, std::abs(I))) break;
      if (++halvings > opts.max_halvings)
        throw SolverError("heat flow could not keep the functional non-increasing at step " + std::to_string(step));
      h *= 0.5;
      ++res.rejected_steps;
    }
    double change = 0.0;
    for (size_t k = 0; k < next.size(); ++k) change = std::max(change, std::abs(next[k] - eta.values[k]));
    eta.values.swap(next);
    t += h;
    I = I_next;
    res.steps_taken = step;
    const bool done = change / h < opts.convergence_tol;
    if (step % opts.record_every == 0 || step == steps || done) res.trajectory.push_back({eta, t, I});
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.terminal_residual = residual(sp, eta, F);
  return res;
}

EquilibriumResult heat_flow_equilibrium(const TorusField& F, const TorusField& eta0, double dt, int steps,
                                        double shift_lo, double shift_hi) {
  check_same_grid(F, eta0, "heat flow");
  eta0.validate("initial exponent");
  if (!(dt > 0) || steps < 1) throw ValidationError("equilibrium search needs dt > 0 and at least one step");
  if (!(shift_lo < shift_hi)) throw ValidationError("shift bracket must satisfy lo < hi");
  TorusSpectral sp(eta0.n1, eta0.n2, eta0.L1, eta0.L2);
  const FlowOptions defaults;

  // Sign of d(mean eta)/dt at the end of the run, or at the moment of blow-up.
  auto drift = [&](double c) {
    std::vector<double> eta = eta0.values, next;
    for (double& x : eta) x += c;
    TorusField probe = eta0;
    for (int step = 0; step < steps; ++step) {
      if (!advance(sp, F, FlowScheme::semi_implicit, dt, eta, next) || max_abs(next) > defaults.blowup_cap) break;
      eta.swap(next);
    }
    probe.values = eta;
    return weighted_mass(probe, F);
  };

  double lo = shift_lo, hi = shift_hi;
  const double dlo = drift(lo), dhi = drift(hi);
  if (dlo == 0.0 || dhi == 0.0 || (dlo > 0) == (dhi > 0))
    throw SolverError("equilibrium shift not bracketed: drift has the same sign at both ends of [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  const bool lo_positive = dlo > 0;
  int it = 0;
  while (it < 200) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    ++it;
    const double d = drift(mid);
    if (d == 0.0) {
      lo = hi = mid;
      break;
    }
    ((d > 0) == lo_positive ? lo : hi) = mid;
  }
  const double shift = 0.5 * (lo + hi);
  TorusField start = eta0;
  for (double& x : start.values) x += shift;
  FlowOptions opts;
  opts.convergence_tol = 0.0;
  opts.record_every = std::max(1, steps / 100);
  return {heat_flow(F, start, dt, steps, opts), shift, it};
}

MeanSplit split_mean(const TorusField& eta) {
  MeanSplit s{eta.mean(), eta};
  for (double& x : s.u.values) x -= s.c;
  return s;
}

double mean_field_residual(const TorusField& u, const TorusField& F, int genus) {
  check_same_grid(u, F, "mean-field residual");
  u.validate("mean-zero part");
  if (genus < 0) throw ValidationError("genus must be non-negative");
  const double m = u.mean();
  if (std::abs(m) > 1e-10 * (1.0 + max_abs(u.values)))
    throw ValidationError("mean-field residual needs a mean-zero field, mean is " + std::to_string(m));
  const int chi = 2 - 2 * genus;
  const double K0 = 2.0 * pi * chi / u.area();
  TorusSpectral sp(u.n1, u.n2, u.L1, u.L2);
  const auto lap = sp.laplacian(u.values);
  const double mass = chi == 0 ? 0.0 : weighted_mass(u, F);
  if (chi != 0 && mass == 0.0) throw ValidationError("mean-field equation undefined: int F e^u vanishes");
  double r = 0.0;
  for (size_t k = 0; k < lap.size(); ++k) {
    const double rhs = chi == 0 ? 0.0 : 4.0 * pi * chi * F.values[k] * std::exp(u.values[k]) / mass;
    r = std::max(r, std::abs(-lap[k] + 2.0 * K0 - rhs));
  }
  return r;
}

} // namespace curvlab
