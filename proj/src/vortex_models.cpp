#include "curvlab/vortex_models.hpp"

#include "curvlab/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;

double ipow(double s, int m) { return m == 0 ? 1.0 : std::pow(s, m); }

// int_0^s f by 20-point Gauss-Legendre; f is analytic on [0, 2] for every
// model that needs it.
std::function<double(double)> primitive_of(std::function<double(double)> f) {
  return [f](double s) {
    if (s == 0.0) return 0.0;
    return boost::math::quadrature::gauss<double, 20>::integrate(f, 0.0, s);
  };
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

void finish_lohe(ModelSpec& M) {
  M.family = ModelFamily::lohe;
  M.h = nullptr;
  M.inv_h2 = nullptr;
  M.inv_h2_ds = nullptr;
}

void finish_dielectric(ModelSpec& M) {
  M.family = ModelFamily::dielectric;
  M.tau = 1.0;
  M.F_kinetic = [](double) { return 1.0; };
  M.f_current = nullptr;
  M.h_int = nullptr;
}

// Eighth-order central difference. The step is small enough that the
// truncation error stays far below the 1e-8 threshold next to the log_b
// singularity at s = -b.
double diff8(const std::function<double(double)>& f, double x, double h = 2e-3) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  double d = 0.0;
  for (int k = 1; k <= 4; ++k) d += c[k - 1] * (f(x + k * h) - f(x - k * h));
  return d / h;
}

bool sample_monotone(const ModelSpec& M) {
  const int n = 8000;
  double prev = rhs_eval(M, -40.0);
  for (int k = 1; k <= n; ++k) {
    const double v = -40.0 + 40.0 * k / n;
    const double cur = rhs_eval(M, v);
    if (cur < prev - 1e-14 * (1.0 + std::abs(prev))) return false;
    prev = cur;
  }
  return true;
}

} // namespace

double ModelSpec::metric_potential(double s) const {
  if (family == ModelFamily::dielectric) return s;
  return 2.0 * h_int(s);
}

const std::vector<std::string>& model_names() {
  static const std::vector<std::string> names = {
      "ah_classical", "gauged_sigma",  "power_m",          "log_b",           "arctan_alpha",     "flip_m",
      "sinh_beta",    "chern_simons", "dielectric_power", "dielectric_plus_m", "dielectric_inv_m"};
  return names;
}

ModelSpec make_model(const std::string& name, const ModelParams& p) {
  require(std::isfinite(p.b) && std::isfinite(p.alpha) && std::isfinite(p.beta) && std::isfinite(p.kappa),
          "model parameters must be finite");
  ModelSpec M;
  M.name = name;
  M.params = p;
  const int m = p.m;

  if (name == "ah_classical") {
    M.tau = 1.0;
    M.w = [](double s) { return 0.5 * (1.0 - s); };
    M.F_kinetic = [](double) { return 1.0; };
    M.f_current = [](double) { return 0.5; };
    M.h_int = [](double s) { return 0.5 * s; };
    finish_lohe(M);
  } else if (name == "gauged_sigma") {
    M.tau = 2.0;
    M.w = [](double s) { return (1.0 - s) / (1.0 + s); };
    M.F_kinetic = [](double s) { return 4.0 / ((1.0 + s) * (1.0 + s)); };
    M.f_current = [](double s) { return 2.0 / (1.0 + s); };
    M.h_int = [](double s) { return 2.0 * std::log1p(s); };
    finish_lohe(M);
  } else if (name == "power_m") {
    require(m >= 1, "power_m needs an integer m >= 1");
    M.tau = 1.0 / m;
    M.w = [m](double s) { return (1.0 - ipow(s, m)) / (2.0 * m); };
    M.F_kinetic = [m](double s) { return ipow(s, m - 1); };
    M.f_current = [m](double s) { return ipow(s, m - 1) / (2.0 * m); };
    M.h_int = [m](double s) { return ipow(s, m) / (2.0 * m * m); };
    finish_lohe(M);
  } else if (name == "log_b") {
    require(p.b > 0.0, "log_b needs b > 0");
    const double b = p.b;
    M.tau = std::log((1.0 + b) / b);
    M.w = [b](double s) { return 0.5 * std::log((1.0 + b) / (s + b)); };
    M.F_kinetic = [b](double s) { return 1.0 / (s + b); };
    M.f_current = [b](double s) {
      if (std::abs(s) < 1e-8 * b) return 0.5 / b * (1.0 - 0.5 * s / b);
      return std::log1p(s / b) / (2.0 * s);
    };
    M.h_int = primitive_of(M.f_current);
    finish_lohe(M);
  } else if (name == "arctan_alpha") {
    require(p.alpha > 0.0, "arctan_alpha needs alpha > 0");
    const double a = p.alpha;
    M.tau = a * pi / 4.0;
    M.w = [a](double s) { return 0.5 * a * (pi / 4.0 - std::atan(s)); };
    M.F_kinetic = [a](double s) { return a / (1.0 + s * s); };
    M.f_current = [a](double s) {
      if (std::abs(s) < 1e-6) return 0.5 * a * (1.0 - s * s / 3.0);
      return 0.5 * a * std::atan(s) / s;
    };
    M.h_int = primitive_of(M.f_current);
    finish_lohe(M);
  } else if (name == "flip_m") {
    require(m >= 1, "flip_m needs an integer m >= 1");
    M.tau = 2.0;
    M.w = [m](double s) { return (1.0 - ipow(s, m)) / (1.0 + ipow(s, m)); };
    M.F_kinetic = [m](double s) {
      const double d = 1.0 + ipow(s, m);
      return 4.0 * m * ipow(s, m - 1) / (d * d);
    };
    M.f_current = [m](double s) { return 2.0 * ipow(s, m - 1) / (1.0 + ipow(s, m)); };
    M.h_int = [m](double s) { return 2.0 / m * std::log1p(ipow(s, m)); };
    finish_lohe(M);
  } else if (name == "sinh_beta") {
    require(p.beta > 0.0, "sinh_beta needs beta > 0");
    const double bt = p.beta;
    const double sh1 = std::sinh(1.0);
    M.tau = bt;
    M.w = [bt, sh1](double s) { return 0.5 * bt * (1.0 - std::sinh(s) / sh1); };
    M.F_kinetic = [bt, sh1](double s) { return bt * std::cosh(s) / sh1; };
    M.f_current = [bt, sh1](double s) {
      if (std::abs(s) < 1e-6) return 0.5 * bt / sh1 * (1.0 + s * s / 6.0);
      return 0.5 * bt * std::sinh(s) / (s * sh1);
    };
    M.h_int = primitive_of(M.f_current);
    finish_lohe(M);
  } else if (name == "chern_simons" || name == "dielectric_power" || name == "dielectric_plus_m" ||
             name == "dielectric_inv_m") {
    require(p.kappa > 0.0, name + " needs kappa > 0");
    const double kap = p.kappa;
    const double c = 4.0 / (kap * kap);
    if (name == "chern_simons") {
      M.h = [kap](double s) { return kap / (2.0 * std::sqrt(s)); };
      M.w = [kap](double s) { return std::sqrt(s) * (1.0 - s) / kap; };
      M.inv_h2 = [c](double s) { return c * s; };
      M.inv_h2_ds = [c](double) { return c; };
    } else {
      require(m >= 0, name + " needs an integer m >= 0");
      const double hm = 0.5 * m;
      if (name == "dielectric_power") {
        M.h = [kap, hm](double s) { return kap / (2.0 * std::pow(s, hm)); };
        M.w = [kap, hm](double s) { return std::pow(s, hm) * (1.0 - s) / kap; };
        M.inv_h2 = [c, m](double s) { return c * ipow(s, m); };
        M.inv_h2_ds = [c, m](double s) { return m == 0 ? 0.0 : c * m * ipow(s, m - 1); };
      } else if (name == "dielectric_plus_m") {
        M.h = [kap, hm](double s) { return kap / (2.0 * std::pow(1.0 + s, hm)); };
        M.w = [kap, hm](double s) { return std::pow(1.0 + s, hm) * (1.0 - s) / kap; };
        M.inv_h2 = [c, m](double s) { return c * ipow(1.0 + s, m); };
        M.inv_h2_ds = [c, m](double s) { return m == 0 ? 0.0 : c * m * ipow(1.0 + s, m - 1); };
      } else {
        M.h = [kap, hm](double s) { return 0.5 * kap * std::pow(1.0 + s, hm); };
        M.w = [kap, hm](double s) { return (1.0 - s) / (kap * std::pow(1.0 + s, hm)); };
        M.inv_h2 = [c, m](double s) { return c / ipow(1.0 + s, m); };
        M.inv_h2_ds = [c, m](double s) { return -c * m / ipow(1.0 + s, m + 1); };
      }
    }
    finish_dielectric(M);
  } else {
    throw ValidationError("unknown model '" + name + "'");
  }

  M.rhs_monotone = sample_monotone(M);
  consistency_check(M);
  return M;
}

ConsistencyReport consistency_check(const ModelSpec& M) {
  ConsistencyReport rep{0.0, "none"};
  auto note = [&](double r, const char* what) {
    if (!(r <= rep.max_residual)) {
      rep.max_residual = std::isnan(r) ? INFINITY : r;
      rep.worst_check = what;
    }
  };
  const int n = 200;
  note(std::abs(M.w(1.0)), "w(1) = 0");

  if (M.family == ModelFamily::lohe) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    note(std::abs(M.f_current(1.0) - 0.5 * M.tau), "f(1) = tau/2");
    for (int k = 0; k <= n; ++k) {
      const double s = 2.0 * k / n;
      const double w = M.w(s);
      // w(s) = (1/2) int_s^1 F
      const double q = 0.5 * GK::integrate(M.F_kinetic, s, 1.0, 6, 1e-12);
      note(std::abs(w - q), "w = (1/2) int_s^1 F");
      note(std::abs(w - 0.5 * M.tau + M.f_current(s) * s), "w - tau/2 = -f s");
      const double H = GK::integrate(M.f_current, 0.0, s, 6, 1e-12);
      note(std::abs(M.h_int(s) - H) / (1.0 + std::abs(H)), "h_int = int_0^s f");
      if (s >= 0.01) {
        const double dw = diff8(M.w, s);
        const double F = M.F_kinetic(s);
        note(std::abs(F + 2.0 * dw) / (1.0 + std::abs(F)), "F = -2 w'");
      }
    }
  } else {
    for (int k = 1; k <= n; ++k) {
      const double s = 2.0 * k / n;
      note(std::abs(2.0 * M.h(s) * M.w(s) - (1.0 - s)), "2 h w = 1 - s");
      note(std::abs(M.inv_h2(s) * M.h(s) * M.h(s) - 1.0), "1/h^2");
      const double d = diff8(M.inv_h2, std::max(s, 0.01));
      const double e = M.inv_h2_ds(std::max(s, 0.01));
      note(std::abs(d - e) / (1.0 + std::abs(e)), "d(1/h^2)/ds");
    }
  }
  if (!(rep.max_residual <= 1e-8)) {
    throw InconsistencyError("model '" + M.name + "' fails consistency check '" + rep.worst_check +
                             "' with residual " + fmt_sci(rep.max_residual));
  }
  return rep;
}

double rhs_eval(const ModelSpec& M, double v, double c) {
  const double s = std::exp(v);
  if (M.family == ModelFamily::lohe) return -2.0 * c * M.w(s);
  const double inv = M.inv_h2(s);
  if (!std::isfinite(inv)) throw ValidationError("singular profile: h(e^v) = 0 at v = " + std::to_string(v));
  return c * (s - 1.0) * inv;
}

double rhs_dv(const ModelSpec& M, double v, double c) {
  const double s = std::exp(v);
  if (M.family == ModelFamily::lohe) return c * M.F_kinetic(s) * s;
  return c * s * (M.inv_h2(s) + (s - 1.0) * M.inv_h2_ds(s));
}

double energy_density(const ModelSpec& M, double v, double grad_v_sq, double c) {
  const double s = std::exp(v);
  const double w = M.w(s);
  return c * w * w + 0.25 * M.F_kinetic(s) * s * grad_v_sq;
}

double vacuum_mass_sq(const ModelSpec& M) { return rhs_dv(M, 0.0, 1.0); }

} // namespace curvlab
