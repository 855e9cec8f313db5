#include "curvlab/surface_geom.hpp"

#include "curvlab/errors.hpp"
#include "curvlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;

void check_grid(int n_u, int n_v) {
  if (n_u < 8 || n_v < 8) throw ValidationError("surface grid needs n_u, n_v >= 8");
  if (n_v % 2 != 0) throw ValidationError("surface grid needs an even n_v");
}

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

bool segments_cross(double x1, double y1, double x2, double y2, double x3, double y3, double x4, double y4) {
  const double d1 = cross2(x4 - x3, y4 - y3, x1 - x3, y1 - y3);
  const double d2 = cross2(x4 - x3, y4 - y3, x2 - x3, y2 - y3);
  const double d3 = cross2(x2 - x1, y2 - y1, x3 - x1, y3 - y1);
  const double d4 = cross2(x2 - x1, y2 - y1, x4 - x1, y4 - y1);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

int wrap(int i, int n) { return ((i % n) + n) % n; }

} // namespace

ParamSurface ParamSurface::sphere(double R, int n_u, int n_v, Orientation o) {
  if (!(R > 0) || !std::isfinite(R)) throw ValidationError("sphere requires R > 0");
  check_grid(n_u, n_v);
  ParamSurface s;
  s.kind_ = SurfaceKind::sphere;
  s.orientation_ = o;
  s.n_u_ = n_u;
  s.n_v_ = n_v;
  s.p0_ = R;
  s.build_nodes();
  return s;
}

ParamSurface ParamSurface::ring_torus(double a, double b, int n_u, int n_v, Orientation o) {
  if (!(b > 0) || !(a > b) || !std::isfinite(a))
    throw ValidationError("ring torus requires a > b > 0 (got a=" + std::to_string(a) + ", b=" + std::to_string(b) + ")");
  check_grid(n_u, n_v);
  ParamSurface s;
  s.kind_ = SurfaceKind::ring_torus;
  s.orientation_ = o;
  s.n_u_ = n_u;
  s.n_v_ = n_v;
  s.p0_ = a;
  s.p1_ = b;
  s.build_nodes();
  return s;
}

ParamSurface ParamSurface::revolution(std::vector<double> rho, std::vector<double> z, int n_u, int n_v,
                                      Orientation o) {
  if (rho.size() != z.size() || rho.size() < 8)
    throw ValidationError("revolution profile needs matching rho/z samples, at least 8");
  check_grid(n_u, n_v);
  const int m = static_cast<int>(rho.size());
  for (int k = 0; k < m; ++k) {
    if (!std::isfinite(rho[k]) || !std::isfinite(z[k])) throw ValidationError("revolution profile has non-finite samples");
    if (!(rho[k] > 0)) throw ValidationError("revolution profile must stay off the axis (rho > 0)");
  }
  for (int k = 0; k < m; ++k) {
    for (int l = k + 2; l < m; ++l) {
      if (k == 0 && l == m - 1) continue;
      const int k1 = k + 1, l1 = (l + 1) % m;
      if (segments_cross(rho[k], z[k], rho[k1], z[k1], rho[l], z[l], rho[l1], z[l1]))
        throw ValidationError("revolution profile is not simple (segments " + std::to_string(k) + " and " +
                              std::to_string(l) + " cross)");
    }
  }
  double area2 = 0.0;
  for (int k = 0; k < m; ++k) area2 += cross2(rho[k], z[k], rho[(k + 1) % m], z[(k + 1) % m]);
  if (std::abs(area2) == 0.0) throw ValidationError("revolution profile encloses no area");
  if (area2 < 0) {
    // Counterclockwise traversal gives the inward normal.
    std::reverse(rho.begin() + 1, rho.end());
    std::reverse(z.begin() + 1, z.end());
  }
  ParamSurface s;
  s.kind_ = SurfaceKind::revolution;
  s.orientation_ = o;
  s.n_u_ = n_u;
  s.n_v_ = n_v;
  s.prof_rho_ = std::move(rho);
  s.prof_z_ = std::move(z);
  s.build_nodes();
  return s;
}

ParamSurface ParamSurface::with_grid(int n_u, int n_v) const {
  check_grid(n_u, n_v);
  ParamSurface s = *this;
  s.n_u_ = n_u;
  s.n_v_ = n_v;
  s.build_nodes();
  return s;
}

void ParamSurface::build_nodes() {
  prof_.resize(n_u_);
  wu_.resize(n_u_);
  switch (kind_) {
  case SurfaceKind::sphere: {
    const double R = p0_;
    const int n = n_u_;
    for (int i = 0; i < n; ++i) {
      const double t = u(i);
      prof_[i] = {R * std::sin(t), -R * std::cos(t), R * std::cos(t), R * std::sin(t), -R * std::sin(t), R * std::cos(t)};
      // Fejer's first rule on midpoint nodes integrates g(cos t) sin t dt;
      // dividing by sin t turns it into a weight for g(t) sin t.
      double w = 1.0;
      for (int k = 1; k <= n / 2; ++k) w -= 2.0 * std::cos(2.0 * k * t) / (4.0 * k * k - 1.0);
      wu_[i] = 2.0 / n * w / std::sin(t);
    }
    break;
  }
  case SurfaceKind::ring_torus: {
    const double a = p0_, b = p1_;
    for (int i = 0; i < n_u_; ++i) {
      const double t = u(i), c = std::cos(t), s = std::sin(t);
      prof_[i] = {a + b * c, b * s, -b * s, b * c, -b * c, -b * s};
      wu_[i] = 2.0 * pi / n_u_;
    }
    break;
  }
  case SurfaceKind::revolution: {
    const PeriodicInterpolant ir(prof_rho_), iz(prof_z_);
    for (int i = 0; i < n_u_; ++i) {
      const double t = u(i);
      prof_[i] = {ir.value(t), iz.value(t), ir.derivative(t, 1), iz.derivative(t, 1), ir.derivative(t, 2),
                  iz.derivative(t, 2)};
      if (!(prof_[i].rho > 0))
        throw ValidationError("interpolated revolution profile touches the axis near u=" + std::to_string(t));
      wu_[i] = 2.0 * pi / n_u_;
    }
    break;
  }
  }
}

double ParamSurface::u(int i) const {
  if (kind_ == SurfaceKind::sphere) return (i + 0.5) * pi / n_u_;
  return 2.0 * pi * i / n_u_;
}

double ParamSurface::v(int j) const { return 2.0 * pi * j / n_v_; }

double ParamSurface::v_weight() const { return 2.0 * pi / n_v_; }

std::string ParamSurface::describe() const {
  std::ostringstream os;
  switch (kind_) {
  case SurfaceKind::sphere: os << "sphere(R=" << p0_ << ")"; break;
  case SurfaceKind::ring_torus: os << "ring_torus(a=" << p0_ << ", b=" << p1_ << ")"; break;
  case SurfaceKind::revolution: os << "revolution(" << prof_rho_.size() << " profile samples)"; break;
  }
  os << " grid " << n_u_ << "x" << n_v_;
  return os.str();
}

std::vector<double> sample_on_grid(const ParamSurface& s, const std::function<double(double, double)>& f) {
  std::vector<double> out(s.size());
  for (int i = 0; i < s.n_u(); ++i)
    for (int j = 0; j < s.n_v(); ++j) out[i * s.n_v() + j] = f(s.u(i), s.v(j));
  return out;
}

CurvatureField curvature_data(const ParamSurface& s) {
  CurvatureField cf;
  cf.n_u = s.n_u();
  cf.n_v = s.n_v();
  const int n = s.size();
  for (auto* vec : {&cf.u, &cf.v, &cf.E, &cf.F, &cf.G, &cf.k1, &cf.k2, &cf.H, &cf.K, &cf.area_density, &cf.dA})
    vec->resize(n);
  const double sign = s.orientation() == Orientation::inward ? 1.0 : -1.0;
  // A node whose metric is tiny compared with the rest of the chart is a
  // stationary point of the parametrization; rounding alone keeps EG - F^2
  // from being exactly zero there.
  double mean_E = 0.0;
  for (int i = 0; i < s.n_u(); ++i) {
    const ProfilePoint& p = s.profile(i);
    mean_E += (p.rho_u * p.rho_u + p.z_u * p.z_u) / s.n_u();
  }
  for (int i = 0; i < s.n_u(); ++i) {
    const ProfilePoint& p = s.profile(i);
    const double E = p.rho_u * p.rho_u + p.z_u * p.z_u;
    const double G = p.rho * p.rho;
    const double sE = std::sqrt(E);
    const double k1 = sign * (p.z_u * p.rho_uu - p.rho_u * p.z_uu) / (E * sE);
    const double k2 = -sign * p.z_u / (p.rho * sE);
    for (int j = 0; j < s.n_v(); ++j) {
      const int idx = i * s.n_v() + j;
      const double cv = std::cos(s.v(j)), sv = std::sin(s.v(j));
      // x_u = (rho_u cos v, rho_u sin v, z_u), x_v = (-rho sin v, rho cos v, 0)
      const double F = p.rho_u * cv * (-p.rho * sv) + p.rho_u * sv * (p.rho * cv);
      const double det = E * G - F * F;
      if (!(det > 1e-14 * mean_E * G) || !std::isfinite(det))
        throw ValidationError("degenerate parametrization at node (" + std::to_string(i) + ", " + std::to_string(j) +
                              "): EG - F^2 = " + std::to_string(det));
      cf.u[idx] = s.u(i);
      cf.v[idx] = s.v(j);
      cf.E[idx] = E;
      cf.F[idx] = F;
      cf.G[idx] = G;
      cf.k1[idx] = k1;
      cf.k2[idx] = k2;
      cf.H[idx] = 0.5 * (k1 + k2);
      cf.K[idx] = k1 * k2;
      cf.area_density[idx] = std::sqrt(det);
      cf.dA[idx] = cf.area_density[idx] * s.u_weight(i) * s.v_weight();
    }
  }
  return cf;
}

double surface_integral(const ParamSurface& s, const std::vector<double>& integrand) {
  if (static_cast<int>(integrand.size()) != s.size())
    throw ValidationError("integrand has " + std::to_string(integrand.size()) + " samples, grid has " +
                          std::to_string(s.size()));
  double total = 0.0;
  for (int i = 0; i < s.n_u(); ++i) {
    const ProfilePoint& p = s.profile(i);
    const double J = p.rho * std::sqrt(p.rho_u * p.rho_u + p.z_u * p.z_u);
    double row = 0.0;
    for (int j = 0; j < s.n_v(); ++j) row += integrand[i * s.n_v() + j];
    total += row * J * s.u_weight(i) * s.v_weight();
  }
  return total;
}

double surface_area(const ParamSurface& s) { return surface_integral(s, std::vector<double>(s.size(), 1.0)); }

double enclosed_volume(const ParamSurface& s) {
  // V = (1/3) int x . nu_out dsigma with nu_out the geometric outward normal.
  std::vector<double> g(s.size());
  for (int i = 0; i < s.n_u(); ++i) {
    const ProfilePoint& p = s.profile(i);
    const double sE = std::sqrt(p.rho_u * p.rho_u + p.z_u * p.z_u);
    const double xn = (p.rho * p.z_u - p.z * p.rho_u) / sE;
    for (int j = 0; j < s.n_v(); ++j) g[i * s.n_v() + j] = xn / 3.0;
  }
  return surface_integral(s, g);
}

std::vector<double> laplace_beltrami(const ParamSurface& s, const std::vector<double>& f) {
  const int nu = s.n_u(), nv = s.n_v();
  if (static_cast<int>(f.size()) != s.size()) throw ValidationError("field does not match the surface grid");
  for (double x : f)
    if (!std::isfinite(x)) throw ValidationError("field has non-finite samples");

  // Seam check: a jump across u = 0 or v = 0 much larger than any interior
  // jump means the samples do not come from a periodic function.
  auto seam_check = [&](bool along_u) {
    double interior = 0.0, seam = 0.0;
    const int n_dir = along_u ? nu : nv, n_other = along_u ? nv : nu;
    for (int o = 0; o < n_other; ++o) {
      for (int k = 0; k < n_dir; ++k) {
        const int k1 = (k + 1) % n_dir;
        const double a = along_u ? f[k * nv + o] : f[o * nv + k];
        const double b = along_u ? f[k1 * nv + o] : f[o * nv + k1];
        const double jump = std::abs(b - a);
        if (k1 == 0) seam = std::max(seam, jump);
        else interior = std::max(interior, jump);
      }
    }
    if (seam > 10.0 * interior + 1e-12 * (1.0 + interior))
      throw ValidationError(std::string("field is not periodic across the ") + (along_u ? "u" : "v") + " seam");
  };
  if (s.kind() != SurfaceKind::sphere) seam_check(true);
  seam_check(false);

  const bool sphere = s.kind() == SurfaceKind::sphere;
  const double hu = sphere ? pi / nu : 2.0 * pi / nu;
  const double hv = 2.0 * pi / nv;
  // Value at chart row i (possibly outside [0, nu)) and column j.
  auto at = [&](int i, int j) {
    if (sphere) {
      if (i < 0) return f[(-1 - i) * nv + wrap(j + nv / 2, nv)];
      if (i >= nu) return f[(2 * nu - 1 - i) * nv + wrap(j + nv / 2, nv)];
      return f[i * nv + wrap(j, nv)];
    }
    return f[wrap(i, nu) * nv + wrap(j, nv)];
  };

  std::vector<double> out(s.size());
  for (int i = 0; i < nu; ++i) {
    const ProfilePoint& p = s.profile(i);
    const double E = p.rho_u * p.rho_u + p.z_u * p.z_u;
    const double sE = std::sqrt(E);
    const double J = p.rho * sE;
    const double c = p.rho / sE;
    const double dE = 2.0 * (p.rho_u * p.rho_uu + p.z_u * p.z_uu);
    const double dc = p.rho_u / sE - p.rho * dE / (2.0 * E * sE);
    for (int j = 0; j < nv; ++j) {
      const double f0 = at(i, j);
      const double fu = (at(i - 2, j) - 8.0 * at(i - 1, j) + 8.0 * at(i + 1, j) - at(i + 2, j)) / (12.0 * hu);
      const double fuu =
          (-at(i - 2, j) + 16.0 * at(i - 1, j) - 30.0 * f0 + 16.0 * at(i + 1, j) - at(i + 2, j)) / (12.0 * hu * hu);
      const double fvv =
          (-at(i, j - 2) + 16.0 * at(i, j - 1) - 30.0 * f0 + 16.0 * at(i, j + 1) - at(i, j + 2)) / (12.0 * hv * hv);
      out[i * nv + j] = (c * fuu + dc * fu) / J + fvv / (p.rho * p.rho);
    }
  }
  return out;
}

GaussBonnetReport gauss_bonnet_check(const ParamSurface& s) {
  const CurvatureField cf = curvature_data(s);
  const double total = surface_integral(s, cf.K);
  const double expected = 2.0 * pi * s.euler_characteristic();
  return {total, expected, total - expected};
}

void check_curvature_line_chart(const CurvatureField& cf, double tol) {
  for (size_t k = 0; k < cf.F.size(); ++k) {
    const double scale = std::sqrt(cf.E[k] * cf.G[k]);
    if (std::abs(cf.F[k]) > tol * scale)
      throw ValidationError("chart is not a curvature-line chart: F = " + std::to_string(cf.F[k]) + " at node " +
                            std::to_string(k));
  }
}

} // namespace curvlab
