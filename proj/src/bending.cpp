#include "curvlab/bending.hpp"

#include "curvlab/errors.hpp"
#include "curvlab/roots.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double root_eps = 1e-9;

double positive(const std::optional<double>& v, const char* name, const std::string& ctx) {
  const double x = require(v, name, ctx);
  if (!(x > 0)) throw ValidationError(std::string(name) + " must be positive for " + ctx);
  return x;
}

double nonnegative(const std::optional<double>& v, const char* name, const std::string& ctx) {
  const double x = require(v, name, ctx);
  if (!(x >= 0)) throw ValidationError(std::string(name) + " must be non-negative for " + ctx);
  return x;
}

void check_torus_args(double a, double tau) {
  if (!(a > 0) || !std::isfinite(a)) throw ValidationError("torus radius a must be positive");
  if (!(tau > 0 && tau < 1)) throw ValidationError("torus ratio tau must lie in (0, 1), got " + std::to_string(tau));
}

// b0 = a0 tau0 solves 3 p b^2 + 2 B b + 2 kappa c0 = 0 with B = kappa c0^2 + 2 lambda;
// written without the cancellation of the textbook quadratic formula.
double optimal_tube_radius(double kappa, double c0, double p, double lambda) {
  const double B = kappa * c0 * c0 + 2.0 * lambda;
  const double D = B * B - 6.0 * kappa * c0 * p;
  return -2.0 * kappa * c0 / (std::sqrt(D) + B);
}

} // namespace

double require(const std::optional<double>& value, const char* name, const std::string& context) {
  if (!value) throw ValidationError(std::string("missing parameter ") + name + " for " + context);
  if (!std::isfinite(*value)) throw ValidationError(std::string("parameter ") + name + " is not finite");
  return *value;
}

double BendingParams::omega() const {
  return require(kappa1, "kappa1", "omega") + require(kappa2, "kappa2", "omega");
}
double BendingParams::moduli_gap() const {
  return std::abs(require(kappa1, "kappa1", "moduli gap") - require(kappa2, "kappa2", "moduli gap"));
}
double BendingParams::gamma() const { return require(kappa1, "kappa1", "gamma") / require(kappa2, "kappa2", "gamma"); }
double BendingParams::xi() const { return 0.5 * (require(xi1, "xi1", "xi") + require(xi2, "xi2", "xi")); }
double BendingParams::zeta() const { return require(xi1, "xi1", "zeta") - require(xi2, "xi2", "zeta"); }
double BendingParams::Lambda_helfrich_limit() const {
  const double k = require(kappa, "kappa", "Lambda");
  const double c = require(c0, "c0", "Lambda");
  return require(lambda, "lambda", "Lambda") + 0.5 * k * c * c;
}

BendingKind parse_bending_kind(const std::string& name) {
  if (name == "willmore") return BendingKind::willmore;
  if (name == "helfrich") return BendingKind::helfrich;
  if (name == "canham") return BendingKind::canham;
  if (name == "membrane") return BendingKind::membrane;
  if (name == "anisotropic") return BendingKind::anisotropic;
  throw ValidationError("unknown bending energy kind '" + name + "'");
}

std::string to_string(BendingKind kind) {
  switch (kind) {
  case BendingKind::willmore: return "willmore";
  case BendingKind::helfrich: return "helfrich";
  case BendingKind::canham: return "canham";
  case BendingKind::membrane: return "membrane";
  case BendingKind::anisotropic: return "anisotropic";
  }
  return "?";
}

AnisotropicForms anisotropic_density_forms(const CurvatureField& cf, const BendingParams& params) {
  const double k1m = positive(params.kappa1, "kappa1", "anisotropic energy");
  const double k2m = positive(params.kappa2, "kappa2", "anisotropic energy");
  const double omega = k1m + k2m;
  const double gap = std::abs(k1m - k2m);
  AnisotropicForms out;
  const size_t n = cf.k1.size();
  out.moduli_form.resize(n);
  out.mean_gauss_form.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double a = cf.k1[i], b = cf.k2[i], H = cf.H[i], K = cf.K[i];
    out.moduli_form[i] = 0.5 * (k1m * a * a + k2m * b * b);
    const double sign = (k1m - k2m) * (a - b) >= 0 ? 1.0 : -1.0;
    const double root = 0.5 * std::abs(a - b);  // sqrt(H^2 - K) without the cancellation at umbilics
    out.mean_gauss_form[i] = omega * H * H - 0.5 * omega * K + sign * gap * H * root;
    const double diff = std::abs(out.moduli_form[i] - out.mean_gauss_form[i]);
    out.max_abs_difference = std::max(out.max_abs_difference, diff / (1.0 + std::abs(out.moduli_form[i])));
  }
  return out;
}

double bending_energy(const ParamSurface& s, const BendingParams& params, BendingKind kind) {
  const CurvatureField cf = curvature_data(s);
  const std::string ctx = to_string(kind) + " energy";
  std::vector<double> dens(cf.H.size());
  switch (kind) {
  case BendingKind::willmore: {
    const double k = positive(params.kappa, "kappa", ctx);
    for (size_t i = 0; i < dens.size(); ++i) dens[i] = 2.0 * k * cf.H[i] * cf.H[i];
    break;
  }
  case BendingKind::helfrich: {
    const double k = positive(params.kappa, "kappa", ctx);
    const double c0 = require(params.c0, "c0", ctx);
    for (size_t i = 0; i < dens.size(); ++i) {
      const double t = cf.k1[i] + cf.k2[i] - c0;
      dens[i] = 0.5 * k * t * t;
    }
    break;
  }
  case BendingKind::canham: {
    const double k = positive(params.kappa, "kappa", ctx);
    for (size_t i = 0; i < dens.size(); ++i) dens[i] = 0.5 * k * (cf.k1[i] * cf.k1[i] + cf.k2[i] * cf.k2[i]);
    break;
  }
  case BendingKind::membrane: {
    const double kp = positive(params.kappa_plus, "kappa_plus", ctx);
    const double km = positive(params.kappa_minus, "kappa_minus", ctx);
    for (size_t i = 0; i < dens.size(); ++i) {
      const double sum = cf.k1[i] + cf.k2[i], dif = cf.k1[i] - cf.k2[i];
      dens[i] = 0.5 * kp * sum * sum + 0.5 * km * dif * dif;
    }
    break;
  }
  case BendingKind::anisotropic: {
    AnisotropicForms forms = anisotropic_density_forms(cf, params);
    if (forms.max_abs_difference > 1e-12)
      throw InconsistencyError("anisotropic density forms disagree by " + std::to_string(forms.max_abs_difference));
    dens = std::move(forms.moduli_form);
    break;
  }
  }
  return surface_integral(s, dens);
}

double helfrich_torus_closed_form(double a, double tau, double kappa, double c0) {
  check_torus_args(a, tau);
  if (!(kappa > 0)) throw ValidationError("kappa must be positive");
  return 2.0 * pi * pi * kappa * (1.0 / (tau * std::sqrt(1.0 - tau * tau)) + 2.0 * c0 * a + c0 * c0 * a * a * tau);
}

double full_helfrich_h(double a, double tau, const BendingParams& params) {
  check_torus_args(a, tau);
  const std::string ctx = "full Helfrich energy";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = nonnegative(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  return k / (tau * std::sqrt(1.0 - tau * tau)) + 2.0 * k * c0 * a + (k * c0 * c0 + 2.0 * lam) * a * a * tau +
         p * a * a * a * tau * tau;
}

double full_helfrich_dh_da(double a, double tau, const BendingParams& params) {
  check_torus_args(a, tau);
  const std::string ctx = "full Helfrich energy";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = nonnegative(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  return 2.0 * k * c0 + 2.0 * (k * c0 * c0 + 2.0 * lam) * a * tau + 3.0 * p * a * a * tau * tau;
}

double full_helfrich_torus(double a, double tau, const BendingParams& params) {
  return 2.0 * pi * pi * full_helfrich_h(a, tau, params);
}

double helfrich_torus_optimal_a(double tau, const BendingParams& params) {
  if (!(tau > 0 && tau < 1)) throw ValidationError("tau must lie in (0, 1)");
  const std::string ctx = "torus minimization";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = nonnegative(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  if (!(c0 < 0)) throw SolvabilityError("no minimizer over ring tori: requires c0 < 0");
  return optimal_tube_radius(k, c0, p, lam) / tau;
}

TorusMinimum minimize_full_helfrich_torus(const BendingParams& params) {
  const std::string ctx = "torus minimization";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = require(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  if (!(c0 < 0))
    throw SolvabilityError("no minimizer over ring tori: spontaneous curvature c0 = " + std::to_string(c0) +
                           " >= 0 is an obstruction");
  if (!(p > 0)) throw ValidationError("torus minimization requires p > 0");

  const double B = k * c0 * c0 + 2.0 * lam;
  const double b0 = optimal_tube_radius(k, c0, p, lam);
  const double rhs = b0 * b0 / k * (B + 2.0 * p * b0);
  const double beta0 = 1.0 - rhs;
  if (!(beta0 > 0 && beta0 < 1))
    throw InconsistencyError("ratio equation right-hand side " + std::to_string(rhs) + " outside (0, 1)");

  auto g = [rhs](double t) {
    const double q = 1.0 - t * t;
    return (1.0 - 2.0 * t * t) / (q * std::sqrt(q)) - rhs;
  };
  const RootResult r = bisect_secant(g, 0.0, 1.0 / std::sqrt(2.0) - root_eps);
  const double tau0 = r.x;
  const double a0 = b0 / tau0;
  const std::pair<double, double> bracket{std::sqrt(1.0 - 1.0 / (1.0 + beta0)),
                                          std::sqrt(1.0 - 1.0 / (1.0 + std::sqrt(beta0)))};
  if (!(tau0 > 0 && tau0 < 1.0 / std::sqrt(2.0)))
    throw InconsistencyError("torus minimizer ratio outside (0, 1/sqrt 2)");
  if (!(tau0 > bracket.first && tau0 < bracket.second))
    throw InconsistencyError("torus minimizer ratio " + std::to_string(tau0) + " outside its bracket (" +
                             std::to_string(bracket.first) + ", " + std::to_string(bracket.second) + ")");
  return {a0, b0, tau0, beta0, full_helfrich_torus(a0, tau0, params), bracket, r.iterations};
}

double full_helfrich_sphere_energy(double R, const BendingParams& params) {
  const std::string ctx = "sphere energy";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = nonnegative(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  if (!(R > 0)) throw ValidationError("sphere radius must be positive");
  const double t = 2.0 + c0 * R;
  return 2.0 * pi * k * t * t + 4.0 / 3.0 * pi * p * R * R * R + 4.0 * pi * lam * R * R;
}

SphereMinimum minimize_full_helfrich_sphere(const BendingParams& params) {
  const std::string ctx = "sphere minimization";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = require(params.p, "p", ctx);
  const double lam = nonnegative(params.lambda, "lambda", ctx);
  if (!(c0 < 0))
    throw SolvabilityError("no minimizer over spheres: c0 = " + std::to_string(c0) +
                           " >= 0 leaves the energy increasing in R");
  if (!(p > 0)) throw ValidationError("sphere minimization requires p > 0");

  auto F = [&](double R) { return full_helfrich_sphere_energy(R, params); };
  // The energy first decreases then increases in R; grow the bracket until it
  // turns upward.
  double hi = 1.0 / std::abs(c0);
  int guard = 0;
  while (F(2.0 * hi) <= F(hi)) {
    hi *= 2.0;
    if (++guard > 200) throw SolverError("could not bracket the sphere minimizer");
  }
  boost::uintmax_t max_iter = 500;
  const auto res = boost::math::tools::brent_find_minima(F, 0.0, 2.0 * hi, std::numeric_limits<double>::digits / 2 + 1, max_iter);

  const double B = 2.0 * lam + k * c0 * c0;
  const double printed_radicand = B * B + 8.0 * k * p * c0;
  SphereMinimum out;
  out.R0 = res.first;
  out.energy = res.second;
  out.printed_formula_R0 = printed_radicand >= 0 ? (std::sqrt(printed_radicand) - B) / (2.0 * p)
                                                 : std::numeric_limits<double>::quiet_NaN();
  out.positive_root_R0 = (std::sqrt(B * B - 8.0 * k * p * c0) - B) / (2.0 * p);
  return out;
}

double anisotropic_torus_profile(double tau, double gamma) {
  const double s = std::sqrt(1.0 - tau * tau);
  return gamma / tau + tau / (s * (1.0 + s));
}

AnisotropicTorusMinimum anisotropic_torus_minimum(double kappa1, double kappa2) {
  if (!(kappa1 > 0) || !(kappa2 > 0)) throw ValidationError("anisotropic moduli must be positive");
  const double gamma = kappa1 / kappa2;
  double tau = 1.0 / std::sqrt(2.0);
  int iterations = 0;
  if (gamma != 1.0) {
    auto g = [gamma](double t) {
      const double q = 1.0 - t * t;
      return 1.0 + (2.0 * t * t - 1.0) / (q * std::sqrt(q)) - gamma;
    };
    const RootResult r = bisect_secant(g, root_eps, 1.0 - root_eps);
    tau = r.x;
    iterations = r.iterations;
  }
  const double q = 1.0 - tau * tau;
  return {tau, 2.0 * pi * pi * kappa2 * tau / (q * std::sqrt(q)), iterations};
}

EnergyBounds topological_bounds(int genus, double kappa1, double kappa2) {
  if (genus < 0) throw ValidationError("genus must be non-negative");
  if (!(kappa1 > 0) || !(kappa2 > 0)) throw ValidationError("anisotropic moduli must be positive");
  const double geo = std::sqrt(kappa1 * kappa2);
  if (genus == 0) return {4.0 * pi * geo, 2.0 * pi * (kappa1 + kappa2)};
  return {4.0 * pi * (1.0 + genus) * geo, genus * anisotropic_torus_minimum(kappa1, kappa2).U_min};
}

ShapeResidual shape_residual(const ParamSurface& s, const BendingParams& params) {
  const std::string ctx = "shape residual";
  const double k = positive(params.kappa, "kappa", ctx);
  const double c0 = require(params.c0, "c0", ctx);
  const double p = require(params.p, "p", ctx);
  const double lam = require(params.lambda, "lambda", ctx);
  const CurvatureField cf = curvature_data(s);
  check_curvature_line_chart(cf);
  const std::vector<double> lapH = laplace_beltrami(s, cf.H);
  ShapeResidual out{std::vector<double>(cf.H.size()), 0.0};
  for (size_t i = 0; i < cf.H.size(); ++i) {
    const double H = cf.H[i], K = cf.K[i];
    out.field[i] = p - 2.0 * lam * H + k * (2.0 * H - c0) * (2.0 * H * H - 2.0 * K + c0 * H) + 2.0 * k * lapH[i];
    out.norm = std::max(out.norm, std::abs(out.field[i]));
  }
  return out;
}

} // namespace curvlab
