#include "curvlab/strings_exact.hpp"

#include "curvlab/conformal.hpp"
#include "curvlab/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// P(z) and P'(z) for P = prod (z - r).
void poly_with_derivative(const std::vector<cplx>& roots, cplx z, cplx& P, cplx& dP) {
  P = 1.0;
  dP = 0.0;
  for (const cplx& r : roots) {
    dP = dP * (z - r) + P;
    P *= (z - r);
  }
}

// Trapezoid rule on the circle |z - center| = rho, doubled until it settles.
double circle_integral(const std::function<double(double)>& f, double rel_tol, double abs_floor) {
  int n = 32;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += f(2.0 * pi * k / n);
  double prev = 2.0 * pi * sum / n;
  while (n < 16384) {
    double odd = 0.0;
    for (int k = 0; k < n; ++k) odd += f(2.0 * pi * (2 * k + 1) / (2 * n));
    n *= 2;
    const double cur = 0.5 * prev + 2.0 * pi * odd / n;
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + abs_floor) return cur;
    prev = cur;
  }
  return prev;
}

struct DiskIntegrator {
  std::function<double(double, double)> f;  // integrand at (x, y)
  double theta_rtol = 1e-11;
  double radial_rtol = 1e-10;
  double abs_floor = 1e-15;

  double ring(double r) const {
    if (r == 0.0) return 0.0;
    return r * circle_integral([&](double t) { return f(r * std::cos(t), r * std::sin(t)); }, theta_rtol, abs_floor);
  }
  double mean_on_circle(double r) const {
    return circle_integral([&](double t) { return f(r * std::cos(t), r * std::sin(t)); }, theta_rtol, abs_floor) /
           (2.0 * pi);
  }
  double annulus(double a, double b) const {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    return GK::integrate([&](double r) { return ring(r); }, a, b, 12, radial_rtol);
  }
};

// Radial break points: feature radii, then geometric growth up to R.
std::vector<double> radial_breaks(std::vector<double> features, double R) {
  std::vector<double> b{0.0};
  std::sort(features.begin(), features.end());
  for (double f : features)
    if (f > 1e-12 && f < R) b.push_back(f);
  double r = std::max(1.0, b.back());
  while (2.0 * r < R) {
    r *= 2.0;
    b.push_back(r);
  }
  b.push_back(R);
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double map_scale(const RationalMap& map) {
  double s = 1.0;
  for (auto& p : map.poles) s = std::max(s, std::abs(p));
  for (auto& q : map.zeros) s = std::max(s, std::abs(q));
  return std::max(s, std::pow(std::abs(map.c), 1.0 / (map.N() - map.M())));
}

} // namespace

double StringDistribution::total_strength() const {
  double s = 0.0;
  for (double x : strengths) s += x;
  return s;
}

void StringDistribution::validate() const {
  if (points.empty()) throw ValidationError("string distribution needs at least one point");
  if (points.size() != strengths.size()) throw ValidationError("one strength per string point is required");
  for (double s : strengths)
    if (!(s > 0)) throw ValidationError("string strengths must be positive");
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      if (points[i].x == points[j].x && points[i].y == points[j].y)
        throw ValidationError("string points must be distinct");
  if (!(G >= 0)) throw ValidationError("gravitational constant must be non-negative");
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");
}

void RationalMap::validate() const {
  if (c == cplx(0.0)) throw ValidationError("rational map prefactor c must be nonzero");
  if (!(N() > M())) throw ValidationError("rational map needs more poles than zeros (N > M)");
  for (auto& p : poles)
    for (auto& q : zeros)
      if (p == q) throw ValidationError("a zero coincides with a pole");
}

double ConformalFactor::value(double x, double y) const {
  for (auto& p : singular_points)
    if (p.x == x && p.y == y) return inf;
  return std::exp(eta(x, y));
}

ConformalFactor letelier_factor(const StringDistribution& dist) {
  dist.validate();
  ConformalFactor f;
  const auto pts = dist.points;
  const auto sig = dist.strengths;
  const double G = dist.G, log_lambda = std::log(dist.lambda);
  f.eta = [pts, sig, G, log_lambda](double x, double y) {
    double e = log_lambda;
    for (size_t s = 0; s < pts.size(); ++s) {
      const double d2 = (x - pts[s].x) * (x - pts[s].x) + (y - pts[s].y) * (y - pts[s].y);
      if (d2 == 0.0) return inf;
      e -= 4.0 * G * sig[s] * std::log(d2);
    }
    return e;
  };
  f.alpha = 8.0 * G * dist.total_strength();
  f.singular_points = pts;
  for (auto& p : pts) f.feature_radius = std::max(f.feature_radius, std::hypot(p.x, p.y));
  f.source = "dirac strings";
  return f;
}

ConicalReport letelier_conical_report(const StringDistribution& dist) {
  dist.validate();
  const double s = dist.total_strength();
  const double q = 1.0 - 4.0 * dist.G * s;
  if (!(q > 0)) throw ValidationError("conical change of variables needs 4 G sigma < 1");
  return {s, q, 2.0 * pi * q, 8.0 * pi * dist.G * s};
}

MapValue rational_map_eval(const RationalMap& map, cplx z) {
  map.validate();
  cplx A, dA, B, dB;
  poly_with_derivative(map.zeros, z, A, dA);
  poly_with_derivative(map.poles, z, B, dB);
  MapValue out;
  if (B == cplx(0.0)) {
    out.u = cplx(inf, 0.0);
    out.at_infinity = true;
    return out;
  }
  out.u = map.c * A / B;
  const cplx du = map.c * (dA * B - A * dB) / (B * B);
  out.du_dx1 = du;
  out.du_dx2 = cplx(0.0, 1.0) * du;
  return out;
}

cplx sigma_model_residual(const RationalMap& map, cplx z, double h) {
  // W_i = d_i u / (1 + |u|^2)^2; residual = div W + 2 u |grad u|^2 / (1 + |u|^2)^3.
  auto W = [&](cplx w, int i) {
    const MapValue m = rational_map_eval(map, w);
    const double q = 1.0 + std::norm(m.u);
    return (i == 0 ? m.du_dx1 : m.du_dx2) / (q * q);
  };
  auto d = [&](int i) {
    const cplx e = i == 0 ? cplx(h, 0.0) : cplx(0.0, h);
    return (-W(z + 2.0 * e, i) + 8.0 * W(z + e, i) - 8.0 * W(z - e, i) + W(z - 2.0 * e, i)) / (12.0 * h);
  };
  const MapValue m = rational_map_eval(map, z);
  const double q = 1.0 + std::norm(m.u);
  const double grad2 = std::norm(m.du_dx1) + std::norm(m.du_dx2);
  return d(0) + d(1) + 2.0 * m.u * grad2 / (q * q * q);
}

double sigma_energy_density(const RationalMap& map, cplx z) {
  cplx A, dA, B, dB;
  poly_with_derivative(map.zeros, z, A, dA);
  poly_with_derivative(map.poles, z, B, dB);
  const double c2 = std::norm(map.c);
  const double den = std::norm(B) + c2 * std::norm(A);
  return 4.0 * c2 * std::norm(dA * B - A * dB) / (den * den);
}

SigmaReport sigma_energy_and_degree(const RationalMap& map, double R, double excision, double tail_rtol) {
  map.validate();
  if (!(excision > 0)) throw ValidationError("pole excision radius must be positive");
  std::vector<double> radii;
  for (auto& p : map.poles) radii.push_back(std::abs(p));
  for (auto& q : map.zeros) radii.push_back(std::abs(q));
  const double far = *std::max_element(radii.begin(), radii.end());
  if (!(R > 2.0 * far)) throw ValidationError("quadrature radius must exceed twice the largest pole/zero modulus");

  std::vector<cplx> centers;  // distinct poles
  for (auto& p : map.poles)
    if (std::find(centers.begin(), centers.end(), p) == centers.end()) centers.push_back(p);
  for (size_t i = 0; i < centers.size(); ++i) {
    for (size_t j = i + 1; j < centers.size(); ++j)
      if (std::abs(centers[i] - centers[j]) <= 2.0 * excision) throw ValidationError("poles closer than the excision");
    for (auto& q : map.zeros)
      if (std::abs(centers[i] - q) <= excision) throw ValidationError("zero inside a pole excision circle");
  }

  DiskIntegrator disk;
  disk.f = [&](double x, double y) { return sigma_energy_density(map, cplx(x, y)); };
  const auto breaks = radial_breaks(radii, R);
  double energy = 0.0;
  for (size_t k = 0; k + 1 < breaks.size(); ++k) energy += disk.annulus(breaks[k], breaks[k + 1]);
  const double p = 2.0 * (1 + map.N() - map.M());
  const double tail = 2.0 * pi * R * R * disk.mean_on_circle(R) / (p - 2.0);
  if (tail > tail_rtol * energy)
    throw SolverError("energy quadrature not converged at R = " + std::to_string(R) + ": tail estimate " +
                      std::to_string(tail) + " exceeds " + std::to_string(tail_rtol) + " of the energy");

  // J . dx = 2 |u|^2 / (1 + |u|^2) d(arg u), written without dividing by A.
  const double c2 = std::norm(map.c);
  auto contour = [&](cplx center, double rho) {
    return circle_integral(
        [&](double t) {
          const cplx e = std::polar(1.0, t);
          const cplx z = center + rho * e;
          cplx A, dA, B, dB;
          poly_with_derivative(map.zeros, z, A, dA);
          poly_with_derivative(map.poles, z, B, dB);
          const cplx dz = cplx(0.0, rho) * e;
          const cplx w = (std::conj(A) * dA - std::norm(A) * dB / B) * dz;
          return 2.0 * c2 * w.imag() / (std::norm(B) + c2 * std::norm(A));
        },
        1e-13, 1e-15);
  };
  double degree = contour(0.0, R);
  for (auto& p0 : centers) degree -= contour(p0, excision);

  const int N_detected = static_cast<int>(std::lround(degree / (4.0 * pi)));
  const double target = 4.0 * pi * N_detected;
  if (N_detected < 1 || std::abs(energy + tail - target) > 1e-2 * target)
    throw InconsistencyError("energy " + std::to_string(energy) + " does not saturate the bound 4 pi N = " +
                             std::to_string(target));
  return {energy, tail, degree, N_detected, R};
}

ConformalFactor cg_string_metric(const RationalMap& map, double G, double lambda) {
  map.validate();
  if (!(G >= 0)) throw ValidationError("gravitational constant must be non-negative");
  if (!(lambda > 0)) throw ValidationError("lambda must be positive");
  ConformalFactor f;
  const double c2 = std::norm(map.c), log_lambda = std::log(lambda);
  const auto poles = map.poles, zeros = map.zeros;
  f.eta = [=](double x, double y) {
    const cplx z(x, y);
    double a2 = 1.0, b2 = 1.0;
    for (auto& q : zeros) a2 *= std::norm(z - q);
    for (auto& p : poles) b2 *= std::norm(z - p);
    return log_lambda - 16.0 * pi * G * std::log(b2 + c2 * a2);
  };
  f.alpha = 32.0 * pi * map.N() * G;
  f.curvature_decay = 2.0 * (1 + map.N() - map.M());
  f.feature_radius = map_scale(map);
  f.source = "harmonic map";
  return f;
}

CurvatureReport curvature_deficit_report(const ConformalFactor& factor, int N, double G, double rtol) {
  if (!factor.singular_points.empty())
    throw ValidationError("total curvature needs a regular conformal factor; this one is singular at the sources");
  if (N < 1) throw ValidationError("N must be at least 1");
  if (!(G >= 0)) throw ValidationError("gravitational constant must be non-negative");
  if (!(factor.curvature_decay > 2.0)) throw ValidationError("conformal factor carries no usable curvature decay");

  DiskIntegrator disk;
  disk.f = [&](double x, double y) {
    const double h = 2e-3 * (1.0 + std::hypot(x, y));
    return gauss_curvature_conformal(factor.eta, x, y, h) * std::exp(factor.eta(x, y));
  };
  disk.theta_rtol = 1e-9;
  disk.radial_rtol = 1e-8;
  disk.abs_floor = 1e-13;

  const double deficit = 32.0 * pi * pi * N * G;
  double R = 8.0 * factor.feature_radius, core = 0.0, tail = 0.0;
  auto breaks = radial_breaks({factor.feature_radius}, R);
  for (size_t k = 0; k + 1 < breaks.size(); ++k) core += disk.annulus(breaks[k], breaks[k + 1]);
  for (;;) {
    tail = std::abs(2.0 * pi * R * R * disk.mean_on_circle(R) / (factor.curvature_decay - 2.0));
    if (tail <= rtol * std::abs(core) + 1e-14) break;
    if (R > 1e7)
      throw SolverError("total curvature quadrature: tail estimate " + std::to_string(tail) + " still above tolerance at R = " +
                        std::to_string(R));
    core += disk.annulus(R, 2.0 * R) + disk.annulus(2.0 * R, 4.0 * R);
    R *= 4.0;
  }
  return {core, deficit, std::abs(core - deficit), R, tail};
}

double radial_length_partial(double s, double R) {
  if (!(R >= 0)) throw ValidationError("radius must be non-negative");
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  return GK::integrate([s](double t) { return std::exp((1.0 - s) * t); }, 0.0, std::log1p(R), 15, 1e-12);
}

CompletenessReport completeness_check(int N, double G, CompletenessMode mode, double tau) {
  if (N < 1) throw ValidationError("N must be at least 1");
  if (!(G > 0)) throw ValidationError("completeness check needs G > 0");
  if (mode == CompletenessMode::lohe && !(tau > 0)) throw ValidationError("Chern-class weight tau must be positive");
  CompletenessReport out;
  const double per_string = mode == CompletenessMode::harmonic_map ? 16.0 * pi * G : 4.0 * pi * tau * G;
  out.threshold = 1.0 / per_string;
  out.exponent = per_string * N;
  out.boundary = std::abs(out.exponent - 1.0) <= 1e-12;
  out.complete = N <= out.threshold || out.boundary;
  if (out.exponent <= 1.0 || out.boundary) {
    out.radial_length = inf;
  } else {
    boost::math::quadrature::exp_sinh<double> integrator;
    const double s = out.exponent;
    // in t = ln(1 + r) the integrand is a plain exponential, which exp-sinh handles well
    out.radial_length = integrator.integrate([s](double t) { return std::exp((1.0 - s) * t); });
  }
  return out;
}

} // namespace curvlab
