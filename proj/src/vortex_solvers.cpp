#include "curvlab/vortex_solvers.hpp"

#include "curvlab/errors.hpp"
#include "curvlab/spectral.hpp"

#include <Eigen/Sparse>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <string>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double ninf = -std::numeric_limits<double>::infinity();

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::abs(x));
  return m;
}

// Composite Simpson on a uniform grid with an odd number of nodes.
double simpson(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  if (n < 3) return 0.0;
  double s = f[0] + f[n - 1];
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
  return s * dx / 3.0;
}

// Fourth-order first derivative on a uniform grid, one-sided at the ends.
std::vector<double> derivative4(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  std::vector<double> d(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (k >= 2 && k + 2 < n) {
      d[k] = (f[k - 2] - 8 * f[k - 1] + 8 * f[k + 1] - f[k + 2]) / (12 * dx);
    } else if (k < 2) {
      d[k] = (-25 * f[k] + 48 * f[k + 1] - 36 * f[k + 2] + 16 * f[k + 3] - 3 * f[k + 4]) / (12 * dx);
    } else {
      d[k] = (25 * f[k] - 48 * f[k - 1] + 36 * f[k - 2] - 16 * f[k - 3] + 3 * f[k - 4]) / (12 * dx);
    }
  }
  return d;
}

// -K1/K0 at x: logarithmic derivative of the decaying radial Bessel mode.
double bessel_log_slope(double x) {
  if (x > 600.0) return -1.0 - 0.5 / x;
  return -boost::math::cyl_bessel_k(1, x) / boost::math::cyl_bessel_k(0, x);
}

double radial_v0(int N, double mu, double r) { return N * std::log(mu * r * r / (1.0 + mu * r * r)); }

double default_r_max(const ModelSpec& model, int N, double lambda) {
  const double m = std::sqrt(lambda * vacuum_mass_sq(model));
  return (18.0 + 4.0 * std::sqrt(static_cast<double>(N))) / m;
}

// ---------------------------------------------------------------- radial

struct RadialSystem {
  const ModelSpec& model;
  int N;
  double mu;
  double dt;
  std::vector<double> r;
  std::vector<double> cf;   // lambda e^eta per node
  std::vector<double> src;  // 4 N mu / (1 + mu r^2)^2
  std::vector<double> v0;
  double robin = 0.0;       // v_t = robin * v at r_max

  double s_of(std::size_t k, double V) const {
    const double a = mu * r[k] * r[k];
    return std::exp(V) * std::pow(a / (1.0 + a), N);
  }
  // V_tt = g(V); returns g and dg/dV.
  void g(std::size_t k, double V, double& val, double& dval) const {
    const double v = v0[k] + V;
    const double r2 = r[k] * r[k];
    val = r2 * (rhs_eval(model, v, cf[k]) + src[k]);
    dval = r2 * rhs_dv(model, v, cf[k]);
  }

  // Residual rows scaled by 1 / (dt^2 max(1, r^2)): Numerov in t near the
  // core, the plain Laplacian residual in the far field.
  void residual(const std::vector<double>& V, std::vector<double>& res, std::vector<double>* gd) const {
    const std::size_t n = r.size();
    std::vector<double> gv(n), dg(n);
    for (std::size_t k = 0; k < n; ++k) g(k, V[k], gv[k], dg[k]);
    res.assign(n, 0.0);
    const double c = dt * dt / 12.0;
    res[0] = 2.0 * (V[1] - V[0]) - c * (2.0 * gv[1] + 10.0 * gv[0]);
    for (std::size_t k = 1; k + 1 < n; ++k)
      res[k] = V[k + 1] - 2.0 * V[k] + V[k - 1] - c * (gv[k + 1] + 10.0 * gv[k] + gv[k - 1]);
    const std::size_t e = n - 1;
    const double Vt = (25 * V[e] - 48 * V[e - 1] + 36 * V[e - 2] - 16 * V[e - 3] + 3 * V[e - 4]) / (12 * dt);
    const double a = mu * r[e] * r[e];
    const double v0t = 2.0 * N / (1.0 + a);
    res[e] = (Vt + v0t - robin * (v0[e] + V[e])) * dt * dt;
    for (std::size_t k = 0; k < n; ++k) res[k] /= dt * dt * std::max(1.0, r[k] * r[k]);
    if (gd) *gd = dg;
  }

  SpMat jacobian(const std::vector<double>& dg) const {
    const int n = static_cast<int>(r.size());
    std::vector<Eigen::Triplet<double>> T;
    T.reserve(3 * n + 8);
    const double c = dt * dt / 12.0;
    auto scale = [&](int k) { return 1.0 / (dt * dt * std::max(1.0, r[k] * r[k])); };
    T.emplace_back(0, 0, (-2.0 - 10.0 * c * dg[0]) * scale(0));
    T.emplace_back(0, 1, (2.0 - 2.0 * c * dg[1]) * scale(0));
    for (int k = 1; k + 1 < n; ++k) {
      T.emplace_back(k, k - 1, (1.0 - c * dg[k - 1]) * scale(k));
      T.emplace_back(k, k, (-2.0 - 10.0 * c * dg[k]) * scale(k));
      T.emplace_back(k, k + 1, (1.0 - c * dg[k + 1]) * scale(k));
    }
    const int e = n - 1;
    const double w[5] = {25, -48, 36, -16, 3};
    for (int j = 0; j < 5; ++j) T.emplace_back(e, e - j, w[j] / (12 * dt) * dt * dt * scale(e));
    T.emplace_back(e, e, -robin * dt * dt * scale(e));
    SpMat J(n, n);
    J.setFromTriplets(T.begin(), T.end());
    return J;
  }
};

// ---------------------------------------------------------------- planar

struct DiskGrid {
  int n = 0;
  double h = 0.0, x0 = 0.0, R = 0.0;
  std::vector<unsigned char> mask;  // 1 unknown, 2 Dirichlet ring, 0 unused
  std::vector<int> unknown_index;
  std::vector<int> unknowns;        // node ids of the unknowns
};

DiskGrid make_disk(double R, double h) {
  DiskGrid D;
  D.R = R;
  const int half = static_cast<int>(std::ceil(R / h)) + 2;
  D.n = 2 * half + 1;
  D.h = h;
  D.x0 = -half * h;
  const int n = D.n;
  D.mask.assign(static_cast<std::size_t>(n) * n, 0);
  D.unknown_index.assign(static_cast<std::size_t>(n) * n, -1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = D.x0 + i * h, y = D.x0 + j * h;
      if (x * x + y * y < R * R) D.mask[i * n + j] = 1;
    }
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      const int k = i * n + j;
      if (D.mask[k] != 0) continue;
      if (D.mask[k - n] == 1 || D.mask[k + n] == 1 || D.mask[k - 1] == 1 || D.mask[k + 1] == 1) D.mask[k] = 2;
    }
  for (int k = 0; k < n * n; ++k)
    if (D.mask[k] == 1) {
      D.unknown_index[k] = static_cast<int>(D.unknowns.size());
      D.unknowns.push_back(k);
    }
  return D;
}

// v0 = sum mult ln(mu rho^2 / (1 + mu rho^2)) and its regular Laplacian part.
void planar_background(const FieldGrid& F, std::vector<double>& v0, std::vector<double>& src) {
  const int n = F.n;
  v0.assign(static_cast<std::size_t>(n) * n, 0.0);
  src.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = i * n + j;
      for (std::size_t s = 0; s < F.centers.size(); ++s) {
        const double dx = F.x(i) - F.centers[s].x, dy = F.y(j) - F.centers[s].y;
        const double a = F.mu * (dx * dx + dy * dy);
        const int m = F.multiplicities[s];
        v0[k] += a == 0.0 ? ninf : m * std::log(a / (1.0 + a));
        src[k] += 4.0 * m * F.mu / ((1.0 + a) * (1.0 + a));
      }
    }
}

double disk_residual_at(const FieldGrid& F, const ModelSpec& model, const std::vector<double>& V,
                        const std::vector<double>& src, int k) {
  const int n = F.n;
  const double lap = (V[k - n] + V[k + n] + V[k - 1] + V[k + 1] - 4.0 * V[k]) / (F.h * F.h);
  return lap - rhs_eval(model, F.v0[k] + V[k], F.cf(k)) - src[k];
}

double disk_residual_norm(const FieldGrid& F, const ModelSpec& model, const std::vector<double>& V,
                          const std::vector<double>& src, std::vector<double>* out = nullptr) {
  double m = 0.0;
  if (out) out->assign(V.size(), 0.0);
  for (std::size_t k = 0; k < V.size(); ++k) {
    if (F.mask[k] != 1) continue;
    const double r = disk_residual_at(F, model, V, src, static_cast<int>(k));
    m = std::max(m, std::abs(r));
    if (out) (*out)[k] = r;
  }
  return m;
}

SpMat disk_laplacian(const FieldGrid& F, const DiskGrid& D, const std::vector<double>& diag_shift) {
  const int n = F.n;
  const int nu = static_cast<int>(D.unknowns.size());
  std::vector<Eigen::Triplet<double>> T;
  T.reserve(5 * static_cast<std::size_t>(nu));
  const double ih2 = 1.0 / (F.h * F.h);
  for (int u = 0; u < nu; ++u) {
    const int k = D.unknowns[u];
    T.emplace_back(u, u, 4.0 * ih2 + diag_shift[u]);
    for (int nb : {k - n, k + n, k - 1, k + 1}) {
      const int w = D.unknown_index[nb];
      if (w >= 0) T.emplace_back(u, w, -ih2);
    }
  }
  SpMat A(nu, nu);
  A.setFromTriplets(T.begin(), T.end());
  return A;
}

// Flux, energy and mass of a radial profile outside r = rho (trapezoid in t).
std::array<double, 3> radial_outer_integrals(const FieldGrid& R, const ModelSpec& model, double rho) {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  const std::size_t n = R.r.size();
  const std::vector<double> Vt = derivative4(R.V, R.h);
  auto dens = [&](std::size_t k) {
    const double r2 = R.r[k] * R.r[k];
    const double vt = Vt[k] + 2.0 * R.N() / (1.0 + R.mu * r2);
    const double v = R.v(k), s = std::exp(v), c = R.cf(k), w = model.w(s);
    return std::array<double, 3>{2.0 * pi * r2 * field_strength(model, v, c),
                                 2.0 * pi * (c * w * w * r2 + 0.25 * model.F_kinetic(s) * s * vt * vt),
                                 2.0 * pi * r2 * (1.0 - s)};
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (R.r[k + 1] <= rho) continue;
    const auto a = dens(k), b = dens(k + 1);
    const double frac = R.r[k] >= rho ? 1.0 : std::log(R.r[k + 1] / rho) / R.h;
    for (int q = 0; q < 3; ++q) acc[q] += frac * 0.5 * R.h * (a[q] + b[q]);
  }
  return acc;
}

struct RadialTails {
  std::map<int, FieldGrid> by_mult;
  double value(const std::vector<Point2>& c, const std::vector<int>& mult, double x, double y) const {
    double v = 0.0;
    for (std::size_t s = 0; s < c.size(); ++s) {
      const double rr = std::hypot(x - c[s].x, y - c[s].y);
      v += radial_value(by_mult.at(mult[s]), rr);
    }
    return v;
  }
};

RadialTails radial_tails(const ModelSpec& model, const StringConfiguration& cfg, double mu) {
  RadialTails T;
  RadialOptions ro;
  ro.mu = mu;
  for (int m : std::set<int>(cfg.multiplicities.begin(), cfg.multiplicities.end()))
    T.by_mult.emplace(m, radial_solve(model, m, cfg.lambda, ro));
  return T;
}

struct PlanarSetup {
  FieldGrid F;
  DiskGrid D;
  std::vector<double> src;
};

PlanarSetup planar_setup(const ModelSpec& model, const StringConfiguration& cfg, const PlanarOptions& o) {
  cfg.validate();
  double diam = 0.0, reach = 0.0;
  for (std::size_t a = 0; a < cfg.points.size(); ++a) {
    reach = std::max(reach, std::hypot(cfg.points[a].x, cfg.points[a].y));
    for (std::size_t b = a + 1; b < cfg.points.size(); ++b)
      diam = std::max(diam, std::hypot(cfg.points[a].x - cfg.points[b].x, cfg.points[a].y - cfg.points[b].y));
  }
  if (!(o.h > 0.0)) throw ValidationError("grid spacing h must be positive");
  if (!(o.mu > 0.0)) throw ValidationError("background scale mu must be positive");
  const double R = o.R > 0.0 ? o.R : 10.0 + 5.0 * diam + reach;
  if (reach > R - 2.0 * o.h) throw ValidationError("a vortex center lies on or outside the disk boundary");
  PlanarSetup S;
  S.D = make_disk(R, o.h);
  FieldGrid& F = S.F;
  F.kind = GeometryKind::disk;
  F.model = model.name;
  F.mass_sq = vacuum_mass_sq(model);
  F.lambda = cfg.lambda;
  F.mu = o.mu;
  F.centers = cfg.points;
  F.multiplicities = cfg.multiplicities;
  F.n = S.D.n;
  F.h = o.h;
  F.x0 = F.y0 = S.D.x0;
  F.extent = R;
  F.mask = S.D.mask;
  planar_background(F, F.v0, S.src);
  F.V.assign(F.v0.size(), 0.0);
  if (R < 10.0 + 5.0 * diam) F.warnings.push_back("disk radius below 10 + 5 * diameter of the centers");
  return S;
}

void set_dirichlet(PlanarSetup& S, const RadialTails& tails, const ModelSpec& model) {
  FieldGrid& F = S.F;
  F.tail_flux = F.tail_energy = F.tail_mass = 0.0;
  for (std::size_t s = 0; s < F.centers.size(); ++s) {
    const double rho = F.extent - std::hypot(F.centers[s].x, F.centers[s].y);
    const auto t = radial_outer_integrals(tails.by_mult.at(F.multiplicities[s]), model, rho);
    F.tail_flux += t[0];
    F.tail_energy += t[1];
    F.tail_mass += t[2];
  }
  for (int i = 0; i < F.n; ++i)
    for (int j = 0; j < F.n; ++j) {
      const int k = i * F.n + j;
      if (F.mask[k] == 2) F.V[k] = tails.value(F.centers, F.multiplicities, F.x(i), F.y(j)) - F.v0[k];
    }
}

// Damped Newton on the masked 5-point system; V holds the initial iterate and
// the Dirichlet data.
void planar_newton(PlanarSetup& S, const ModelSpec& model, double tol, int max_newton) {
  FieldGrid& F = S.F;
  const DiskGrid& D = S.D;
  const int nu = static_cast<int>(D.unknowns.size());
  std::vector<double> res;
  double rn = disk_residual_norm(F, model, F.V, S.src, &res);
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  int it = 0;
  for (; it < max_newton && rn > tol; ++it) {
    std::vector<double> shift(nu);
    for (int u = 0; u < nu; ++u) {
      const int k = D.unknowns[u];
      shift[u] = rhs_dv(model, F.v(k), F.cf(k));
    }
    // -J = -Laplacian + diag(rhs'); -J delta = res.
    SpMat A = disk_laplacian(F, D, shift);
    Vec b(nu);
    for (int u = 0; u < nu; ++u) b[u] = res[D.unknowns[u]];
    Vec delta;
    if (!analyzed) {
      ldlt.analyzePattern(A);
      analyzed = true;
    }
    ldlt.factorize(A);
    if (ldlt.info() == Eigen::Success) {
      delta = ldlt.solve(b);
    } else {
      Eigen::SparseLU<SpMat> lu;
      lu.compute(A);
      if (lu.info() != Eigen::Success) throw SolverError("planar Newton: singular Jacobian at iteration " + std::to_string(it));
      delta = lu.solve(b);
    }
    double step = 1.0;
    std::vector<double> trial = F.V;
    double rt = rn;
    int halvings = 0;
    for (; halvings <= 30; ++halvings) {
      for (int u = 0; u < nu; ++u) trial[D.unknowns[u]] = F.V[D.unknowns[u]] + step * delta[u];
      rt = disk_residual_norm(F, model, trial, S.src);
      if (rt < rn) break;
      step *= 0.5;
    }
    if (halvings > 30)
      throw SolverError("planar Newton diverged: no decrease after 30 halvings, residual " + fmt_sci(rn));
    F.V = trial;
    rn = disk_residual_norm(F, model, F.V, S.src, &res);
  }
  if (rn > tol) throw SolverError("planar Newton did not converge: residual " + fmt_sci(rn));
  F.diag.iterations = it;
  F.diag.residual_norm = rn;
}

// ---------------------------------------------------------------- torus

// Smooth step from 1 (t <= 0) to 0 (t >= 1) with derivatives in t.
void cutoff(double t, double& c, double& c1, double& c2) {
  if (t <= 0.0) {
    c = 1.0;
    c1 = c2 = 0.0;
    return;
  }
  if (t >= 1.0) {
    c = c1 = c2 = 0.0;
    return;
  }
  // chi = 1 - S with S the logistic of phi = 1/t - 1/(1 - t), rising from 0 to 1.
  const double phi = 1.0 / t - 1.0 / (1.0 - t);
  const double S = phi > 700.0 ? 0.0 : (phi < -700.0 ? 1.0 : 1.0 / (1.0 + std::exp(phi)));
  const double d1 = -1.0 / (t * t) - 1.0 / ((1.0 - t) * (1.0 - t));
  const double d2 = 2.0 / (t * t * t) - 2.0 / std::pow(1.0 - t, 3);
  const double S1 = -S * (1.0 - S) * d1;
  const double S2 = -S1 * (1.0 - 2.0 * S) * d1 - S * (1.0 - S) * d2;
  c = 1.0 - S;
  c1 = -S1;
  c2 = -S2;
}

struct TorusSource {
  std::vector<double> v0, gx, gy;  // gradient is NaN at a center node
};

double wrap(double d, double L) { return d - L * std::round(d / L); }

TorusSource torus_source(double L, int n, const StringConfiguration& cfg) {
  const double r2 = 0.45 * L, r1 = 0.2 * L, width = r2 - r1;
  const double h = L / n;
  const std::size_t sz = static_cast<std::size_t>(n) * n;
  std::vector<double> phi(sz, 0.0), rhs(sz, 0.0), px(sz, 0.0), py(sz, 0.0);
  const double area = L * L;
  const int N = cfg.total();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * n + j;
      rhs[k] = -4.0 * pi * N / area;
      for (std::size_t s = 0; s < cfg.points.size(); ++s) {
        const int m = cfg.multiplicities[s];
        const double dx = wrap(i * h - cfg.points[s].x, L), dy = wrap(j * h - cfg.points[s].y, L);
        const double rho = std::hypot(dx, dy);
        if (rho == 0.0) {
          phi[k] = ninf;
          px[k] = py[k] = std::numeric_limits<double>::quiet_NaN();
          continue;
        }
        double c, c1, c2;
        cutoff((rho - r1) / width, c, c1, c2);
        c1 /= width;
        c2 /= width * width;
        const double lg = std::log(rho * rho), lg1 = 2.0 / rho;
        phi[k] += m * c * lg;
        const double dphi = m * (c1 * lg + c * lg1);
        px[k] += dphi * dx / rho;
        py[k] += dphi * dy / rho;
        // Laplacian(chi ln rho^2) away from the origin; ln rho^2 is harmonic.
        const double q = c2 * lg + 2.0 * c1 * lg1 + c1 * lg / rho;
        rhs[k] -= m * q;
      }
    }
  TorusSpectral sp(n, n, L, L);
  std::vector<double> symbol(sp.k_squared().size());
  for (std::size_t q = 0; q < symbol.size(); ++q) {
    const double k2 = sp.k_squared()[q];
    symbol[q] = k2 == 0.0 ? 0.0 : -1.0 / k2;
  }
  const std::vector<double> g = sp.apply_symbol(rhs, symbol);
  const std::vector<double> gx = sp.dx(g), gy = sp.dy(g);
  TorusSource T;
  T.v0.resize(sz);
  T.gx.resize(sz);
  T.gy.resize(sz);
  for (std::size_t k = 0; k < sz; ++k) {
    T.v0[k] = phi[k] + g[k];
    T.gx[k] = px[k] + gx[k];
    T.gy[k] = py[k] + gy[k];
  }
  return T;
}

double torus_residual(const TorusSpectral& sp, const FieldGrid& F, const ModelSpec& model, const std::vector<double>& V,
                      double background, std::vector<double>* out = nullptr) {
  const std::vector<double> lap = sp.laplacian(V);
  double m = 0.0;
  if (out) out->assign(V.size(), 0.0);
  for (std::size_t k = 0; k < V.size(); ++k) {
    const double r = lap[k] - rhs_eval(model, F.v0[k] + V[k], F.cf(k)) - background;
    m = std::max(m, std::abs(r));
    if (out) (*out)[k] = r;
  }
  return m;
}

// Preconditioned CG for (-Laplacian + diag(d)) x = b, preconditioner the
// constant-coefficient operator with the mean of d.
std::vector<double> torus_pcg(const TorusSpectral& sp, const std::vector<double>& d, const std::vector<double>& b) {
  const std::size_t n = b.size();
  double dbar = 0.0;
  for (double x : d) dbar += x;
  dbar = std::max(dbar / n, 1e-8);
  std::vector<double> symbol(sp.k_squared().size());
  for (std::size_t q = 0; q < symbol.size(); ++q) symbol[q] = 1.0 / (sp.k_squared()[q] + dbar);
  auto apply = [&](const std::vector<double>& x) {
    std::vector<double> y = sp.laplacian(x);
    for (std::size_t k = 0; k < n; ++k) y[k] = -y[k] + d[k] * x[k];
    return y;
  };
  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * c[k];
    return s;
  };
  std::vector<double> x(n, 0.0), r = b;
  std::vector<double> z = sp.apply_symbol(r, symbol), p = z;
  double rz = dot(r, z);
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) return x;
  for (int it = 0; it < 2000; ++it) {
    const std::vector<double> Ap = apply(p);
    const double pAp = dot(p, Ap);
    if (!(pAp > 0.0)) throw SolverError("torus Newton: Jacobian is not positive definite");
    const double alpha = rz / pAp;
    for (std::size_t k = 0; k < n; ++k) {
      x[k] += alpha * p[k];
      r[k] -= alpha * Ap[k];
    }
    if (std::sqrt(dot(r, r)) < 1e-13 * bnorm) return x;
    z = sp.apply_symbol(r, symbol);
    const double rz_new = dot(r, z);
    for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + rz_new / rz * p[k];
    rz = rz_new;
  }
  throw SolverError("torus Newton: inner conjugate gradients did not converge");
}

// Integrand of e^eta H with the centers filled in by neighbour averages (the
// density is continuous there while the log pieces are not).
void fill_center_nodes(std::vector<double>& dens, int n, bool periodic) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = i * n + j;
      if (std::isfinite(dens[k])) continue;
      double s = 0.0;
      int c = 0;
      for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
        int a = i + di, b = j + dj;
        if (periodic) {
          a = (a + n) % n;
          b = (b + n) % n;
        } else if (a < 0 || b < 0 || a >= n || b >= n) {
          continue;
        }
        const double x = dens[a * n + b];
        if (std::isfinite(x)) {
          s += x;
          ++c;
        }
      }
      dens[k] = c ? s / c : 0.0;
    }
}

} // namespace

// ---------------------------------------------------------------- public

int StringConfiguration::total() const {
  int N = 0;
  for (int m : multiplicities) N += m;
  return N;
}

void StringConfiguration::validate() const {
  if (points.empty()) throw ValidationError("string configuration needs at least one center");
  if (points.size() != multiplicities.size()) throw ValidationError("points and multiplicities differ in length");
  for (int m : multiplicities)
    if (m < 1) throw ValidationError("multiplicities must be positive integers");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("coupling lambda must be positive");
  for (std::size_t a = 0; a < points.size(); ++a) {
    if (!std::isfinite(points[a].x) || !std::isfinite(points[a].y)) throw ValidationError("center is not finite");
    for (std::size_t b = a + 1; b < points.size(); ++b)
      if (points[a].x == points[b].x && points[a].y == points[b].y)
        throw ValidationError("centers must be distinct; merge them into one multiplicity");
  }
}

int FieldGrid::N() const {
  int s = 0;
  for (int m : multiplicities) s += m;
  return s;
}

FieldGrid radial_solve(const ModelSpec& model, int N, double lambda, const RadialOptions& o,
                       const std::vector<double>& conformal, const FieldGrid* initial) {
  if (N < 1) throw ValidationError("vortex number N must be >= 1");
  if (!(lambda > 0.0)) throw ValidationError("coupling lambda must be positive");
  if (!(o.mu > 0.0)) throw ValidationError("background scale mu must be positive");
  const double r_max = o.r_max > 0.0 ? o.r_max : default_r_max(model, N, lambda);
  int n = o.n > 0 ? o.n : 3001;
  if (n % 2 == 0) ++n;
  if (n < 11) throw ValidationError("radial mesh needs at least 11 nodes");
  if (!(o.r_min > 0.0 && o.r_min < r_max)) throw ValidationError("need 0 < r_min < r_max");

  FieldGrid F;
  F.kind = GeometryKind::radial;
  F.model = model.name;
  F.mass_sq = vacuum_mass_sq(model);
  F.lambda = lambda;
  F.mu = o.mu;
  F.centers = {Point2{0.0, 0.0}};
  F.multiplicities = {N};
  F.n = n;
  F.extent = r_max;
  const double t0 = std::log(o.r_min), t1 = std::log(r_max);
  const double dt = (t1 - t0) / (n - 1);
  F.h = dt;
  F.r.resize(n);
  for (int k = 0; k < n; ++k) F.r[k] = std::exp(t0 + k * dt);
  F.r[n - 1] = r_max;

  RadialSystem sys{model, N, o.mu, dt, F.r, {}, {}, {}};
  if (!conformal.empty()) {
    if (static_cast<int>(conformal.size()) != n) throw ValidationError("conformal factor has the wrong length");
    sys.cf = conformal;
    F.conformal = conformal;
  } else {
    sys.cf.assign(n, lambda);
  }
  sys.src.resize(n);
  sys.v0.resize(n);
  for (int k = 0; k < n; ++k) {
    const double a = o.mu * F.r[k] * F.r[k];
    sys.src[k] = 4.0 * N * o.mu / ((1.0 + a) * (1.0 + a));
    sys.v0[k] = radial_v0(N, o.mu, F.r[k]);
  }
  const double mass = std::sqrt(sys.cf[n - 1] * vacuum_mass_sq(model));
  sys.robin = r_max * mass * bessel_log_slope(mass * r_max);
  F.v0 = sys.v0;

  std::vector<double> V(n, 0.0);
  if (initial && initial->V.size() == static_cast<std::size_t>(n)) V = initial->V;
  std::vector<double> res, dg;
  sys.residual(V, res, &dg);
  double rn = max_abs(res);
  int it = 0;
  Eigen::SparseLU<SpMat> lu;
  bool analyzed = false;
  for (; it < o.max_newton && rn > o.tol; ++it) {
    SpMat J = sys.jacobian(dg);
    if (!analyzed) {
      lu.analyzePattern(J);
      analyzed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw SolverError("radial Newton: singular Jacobian, residual " + fmt_sci(rn));
    Vec b(n);
    for (int k = 0; k < n; ++k) b[k] = -res[k];
    const Vec delta = lu.solve(b);
    double step = 1.0;
    std::vector<double> trial(n), rt;
    int halvings = 0;
    double rtn = rn;
    for (; halvings <= 30; ++halvings) {
      for (int k = 0; k < n; ++k) trial[k] = V[k] + step * delta[k];
      sys.residual(trial, rt, nullptr);
      rtn = max_abs(rt);
      if (rtn < rn) break;
      step *= 0.5;
    }
    if (halvings > 30) {
      if (rn <= o.accept) break;  // at the rounding floor
      throw SolverError("radial Newton stagnated at residual " + fmt_sci(rn));
    }
    V = trial;
    sys.residual(V, res, &dg);
    rn = max_abs(res);
  }
  if (!(rn <= o.accept)) throw SolverError("radial Newton stagnated at residual " + fmt_sci(rn));
  F.V = V;
  F.diag = diagnostics(F, model);
  F.diag.iterations = it;
  F.diag.residual_norm = rn;

  bool above = false;
  for (int k = 0; k < n; ++k) above = above || F.v(k) > 0.0;
  if (above) F.warnings.push_back("v leaves (-inf, 0]: profile is not below the vacuum");
  if (std::abs(F.v(n - 1)) > 1e-6) F.warnings.push_back("|v(r_max)| = " + fmt_sci(std::abs(F.v(n - 1))) + " exceeds 1e-6");
  return F;
}

double radial_value(const FieldGrid& F, double r) {
  if (F.kind != GeometryKind::radial) throw ValidationError("radial_value needs a radial field");
  const int n = static_cast<int>(F.r.size());
  const int N = F.N();
  if (r >= F.extent) {
    const double vb = F.v(n - 1);
    const double mass = std::sqrt(F.cf(n - 1) * F.mass_sq);
    if (mass * r > 700.0) return 0.0;
    return vb * boost::math::cyl_bessel_k(0, mass * r) / boost::math::cyl_bessel_k(0, mass * F.extent);
  }
  if (r <= F.r[0]) return F.V[0] + radial_v0(N, F.mu, r);
  // V is smooth in t = ln r; interpolate it there.
  static thread_local const FieldGrid* cached = nullptr;
  static thread_local std::vector<double> cachedV;
  static thread_local std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline;
  if (cached != &F || cachedV != F.V) {
    spline = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        F.V.begin(), F.V.end(), std::log(F.r[0]), F.h);
    cached = &F;
    cachedV = F.V;
  }
  return (*spline)(std::log(r)) + radial_v0(N, F.mu, r);
}

FieldGrid planar_solve_with_factor(const ModelSpec& model, const StringConfiguration& cfg, const PlanarOptions& o,
                                   const std::vector<double>& conformal, const FieldGrid* initial) {
  PlanarSetup S = planar_setup(model, cfg, o);
  const RadialTails tails = radial_tails(model, cfg, o.mu);
  set_dirichlet(S, tails, model);
  if (!conformal.empty()) {
    if (conformal.size() != S.F.v0.size()) throw ValidationError("conformal factor has the wrong length");
    S.F.conformal = conformal;
  }
  if (initial && initial->V.size() == S.F.V.size()) {
    for (std::size_t k = 0; k < S.F.V.size(); ++k)
      if (S.F.mask[k] == 1) S.F.V[k] = initial->V[k];
  }
  planar_newton(S, model, o.tol, o.max_newton);
  const int it = S.F.diag.iterations;
  const double rn = S.F.diag.residual_norm;
  S.F.diag = diagnostics(S.F, model);
  S.F.diag.iterations = it;
  S.F.diag.residual_norm = rn;
  for (std::size_t k = 0; k < S.F.V.size(); ++k)
    if (S.F.mask[k] && S.F.v(k) > 0.0) {
      S.F.warnings.push_back("v leaves (-inf, 0]: profile is not below the vacuum");
      break;
    }
  return S.F;
}

FieldGrid planar_solve(const ModelSpec& model, const StringConfiguration& cfg, const PlanarOptions& o) {
  return planar_solve_with_factor(model, cfg, o, {}, nullptr);
}

namespace {

double comparison_factor(const ModelSpec& model) {
  if (model.name == "dielectric_inv_m") {
    const double kap = model.params.kappa;
    return 4.0 / (kap * kap) / std::pow(2.0, model.params.m);
  }
  if (model.name == "flip_m") return model.params.m == 1 ? 1.0 : 2.0;
  if (model.name == "ah_classical") return 1.0;
  // inf over s in [0, 1) of rhs / (s - 1), sampled, with a safety margin.
  double c = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20000; ++k) {
    const double s = k / 20000.0;
    c = std::min(c, rhs_eval(model, std::log(s)) / (s - 1.0));
  }
  return 0.999 * c;
}

double sup_rhs_dv(const ModelSpec& model) {
  double K = 0.0;
  for (int k = 0; k <= 8000; ++k) K = std::max(K, rhs_dv(model, -40.0 + 40.0 * k / 8000.0));
  return K;
}

} // namespace

SandwichResult monotone_sandwich_solve(const ModelSpec& model, const StringConfiguration& cfg, const PlanarOptions& o,
                                       int max_iter) {
  if (!model.rhs_monotone)
    throw ValidationError("model '" + model.name + "' is not monotone on v <= 0; use planar_solve (Newton)");
  cfg.validate();
  SandwichResult out;
  out.comparison_factor = comparison_factor(model);
  if (!(out.comparison_factor > 0.0)) throw ValidationError("no positive comparison factor for '" + model.name + "'");

  // v-: Laplacian v = lambda c (e^v - 1) + sources.
  StringConfiguration low = cfg;
  low.lambda = cfg.lambda * out.comparison_factor;
  PlanarOptions lo = o;
  lo.tol = std::min(o.tol, 1e-11);
  out.lower = planar_solve(make_model("ah_classical"), low, lo);

  PlanarSetup S = planar_setup(model, cfg, o);
  set_dirichlet(S, radial_tails(model, cfg, o.mu), model);
  FieldGrid& F = S.F;
  const DiskGrid& D = S.D;
  const double tol_order = 1e-9;
  for (std::size_t k = 0; k < F.V.size(); ++k) {
    if (F.mask[k] == 1) F.V[k] = out.lower.V[k];
    if (F.mask[k] == 2 && !(out.lower.V[k] <= F.V[k] + tol_order && F.v(k) <= 0.0))
      throw InconsistencyError("sandwich boundary data out of order at node " + std::to_string(k));
  }

  const double K = cfg.lambda * sup_rhs_dv(model);
  const int nu = static_cast<int>(D.unknowns.size());
  // (K - Laplacian) V_{k+1} = K V_k - lambda rhs(v_k) - src + boundary terms.
  SpMat A = disk_laplacian(F, D, std::vector<double>(nu, K));
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("sandwich: factorisation failed");
  const int n = F.n;
  const double ih2 = 1.0 / (F.h * F.h);
  std::vector<double> res;
  double rn = disk_residual_norm(F, model, F.V, S.src, &res);
  out.residual_history.push_back(rn);
  int it = 0;
  for (; it < max_iter && rn > o.tol; ++it) {
    Vec b(nu);
    for (int u = 0; u < nu; ++u) {
      const int k = D.unknowns[u];
      double bk = K * F.V[k] - rhs_eval(model, F.v(k), F.cf(k)) - S.src[k];
      for (int nb : {k - n, k + n, k - 1, k + 1})
        if (D.unknown_index[nb] < 0) bk += ih2 * F.V[nb];
      b[u] = bk;
    }
    const Vec x = ldlt.solve(b);
    for (int u = 0; u < nu; ++u) {
      const int k = D.unknowns[u];
      const double next = x[u];
      if (next < F.V[k] - tol_order || next < out.lower.V[k] - tol_order || F.v0[k] + next > tol_order)
        throw InconsistencyError("sandwich ordering violated at iterate " + std::to_string(it + 1) + ", node (" +
                                 std::to_string(k / n) + ", " + std::to_string(k % n) +
                                 "): monotonicity hypothesis failed");
      F.V[k] = next;
    }
    rn = disk_residual_norm(F, model, F.V, S.src, &res);
    out.residual_history.push_back(rn);
  }
  if (rn > o.tol) throw SolverError("sandwich iteration did not converge: residual " + fmt_sci(rn));
  out.iterations = it;
  F.diag = diagnostics(F, model);
  F.diag.iterations = it;
  F.diag.residual_norm = rn;
  out.field = F;
  return out;
}

std::vector<double> torus_source_function(double L, int n, const StringConfiguration& cfg) {
  cfg.validate();
  if (!(L > 0.0)) throw ValidationError("torus side must be positive");
  if (n < 8 || (n & (n - 1)) != 0) throw ValidationError("torus grid size must be a power of two >= 8");
  return torus_source(L, n, cfg).v0;
}

CompactResult compact_solve(double L, const ModelSpec& model, const StringConfiguration& cfg, int n, double tol,
                            int max_newton) {
  cfg.validate();
  if (!(L > 0.0)) throw ValidationError("torus side must be positive");
  if (n < 8 || (n & (n - 1)) != 0) throw ValidationError("torus grid size must be a power of two >= 8");
  const int N = cfg.total();
  const double area = L * L;

  // Integrating the equation: lambda int (-rhs) = 4 pi N, while -rhs < sup(-rhs)
  // pointwise for v <= 0 (maximum principle), so lambda sup(-rhs) |S| must
  // exceed 4 pi N.
  double rhs_floor = 0.0;
  for (int k = 0; k <= 8000; ++k) rhs_floor = std::min(rhs_floor, rhs_eval(model, -60.0 + 60.0 * k / 8000.0));
  if (cfg.lambda * -rhs_floor * area <= 4.0 * pi * N) {
    throw SolvabilityError("no solution at this area/lambda: integrating the equation requires lambda int(-rhs) = 4 pi N = " +
                           fmt_sci(4.0 * pi * N) + ", but lambda int(-rhs) < lambda sup(-rhs) |S| = " +
                           fmt_sci(cfg.lambda * -rhs_floor * area));
  }

  FieldGrid F;
  F.kind = GeometryKind::torus;
  F.model = model.name;
  F.mass_sq = vacuum_mass_sq(model);
  F.lambda = cfg.lambda;
  F.centers = cfg.points;
  F.multiplicities = cfg.multiplicities;
  F.n = n;
  F.h = L / n;
  F.extent = L;
  F.mask.assign(static_cast<std::size_t>(n) * n, 1);
  F.v0 = torus_source(L, n, cfg).v0;
  // Start below the vacuum everywhere.
  double vmax = ninf;
  for (double x : F.v0) vmax = std::max(vmax, x);
  F.V.assign(F.v0.size(), -vmax - 0.1);

  TorusSpectral sp(n, n, L, L);
  const double bg = 4.0 * pi * N / area;
  std::vector<double> res;
  double rn = torus_residual(sp, F, model, F.V, bg, &res);
  int it = 0;
  for (; it < max_newton && rn > tol; ++it) {
    std::vector<double> d(F.V.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = rhs_dv(model, F.v(k), F.cf(k));
    const std::vector<double> delta = torus_pcg(sp, d, res);
    double step = 1.0;
    std::vector<double> trial(F.V.size());
    int halvings = 0;
    for (; halvings <= 30; ++halvings) {
      for (std::size_t k = 0; k < trial.size(); ++k) trial[k] = F.V[k] + step * delta[k];
      if (torus_residual(sp, F, model, trial, bg) < rn) break;
      step *= 0.5;
    }
    if (halvings > 30) throw SolverError("torus Newton stagnated at residual " + fmt_sci(rn));
    F.V = trial;
    rn = torus_residual(sp, F, model, F.V, bg, &res);
  }
  if (rn > tol) throw SolverError("torus Newton did not converge: residual " + fmt_sci(rn));
  F.diag = diagnostics(F, model);
  F.diag.iterations = it;
  F.diag.residual_norm = rn;
  return {F, F.diag.flux, 2.0 * pi * N};
}

SolveDiagnostics diagnostics(const FieldGrid& F, const ModelSpec& model) {
  SolveDiagnostics d;
  d.bps_energy = pi * model.tau * F.N();
  if (F.kind == GeometryKind::radial) {
    const std::size_t n = F.r.size();
    const double dt = F.h;
    const int N = F.N();
    const std::vector<double> Vt = derivative4(F.V, dt);
    std::vector<double> fl(n), en(n), ma(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double r = F.r[k], r2 = r * r;
      const double vt = Vt[k] + 2.0 * N / (1.0 + F.mu * r2);
      const double v = F.v(k), s = std::exp(v), c = F.cf(k);
      fl[k] = 2.0 * pi * r2 * field_strength(model, v, c);
      // s |grad v|^2 r^2 = s v_t^2
      const double w = model.w(s);
      en[k] = 2.0 * pi * (c * w * w * r2 + 0.25 * model.F_kinetic(s) * s * vt * vt);
      ma[k] = 2.0 * pi * r2 * (1.0 - s);
    }
    // Disk r < r_min, where v is essentially the source log.
    const double core = pi * F.r[0] * F.r[0];
    d.flux = simpson(fl, dt) + core * field_strength(model, F.v(0), F.cf(0));
    d.energy = simpson(en, dt) + core * energy_density(model, F.v(0), 0.0, F.cf(0));
    d.mass_integral = simpson(ma, dt) + core;
    d.residual_norm = F.diag.residual_norm;
    return d;
  }

  const int n = F.n;
  const double h = F.h;
  const std::size_t sz = static_cast<std::size_t>(n) * n;
  std::vector<double> gx(sz, 0.0), gy(sz, 0.0);
  if (F.kind == GeometryKind::torus) {
    StringConfiguration cfg{F.centers, F.multiplicities, F.lambda};
    const TorusSource T = torus_source(F.extent, n, cfg);
    TorusSpectral sp(n, n, F.extent, F.extent);
    const std::vector<double> Vx = sp.dx(F.V), Vy = sp.dy(F.V);
    for (std::size_t k = 0; k < sz; ++k) {
      gx[k] = T.gx[k] + Vx[k];
      gy[k] = T.gy[k] + Vy[k];
    }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int k = i * n + j;
        if (F.mask[k] != 1) continue;
        double ax = (F.V[k + n] - F.V[k - n]) / (2 * h), ay = (F.V[k + 1] - F.V[k - 1]) / (2 * h);
        for (std::size_t s = 0; s < F.centers.size(); ++s) {
          const double dx = F.x(i) - F.centers[s].x, dy = F.y(j) - F.centers[s].y;
          const double rho2 = dx * dx + dy * dy;
          const double fac = rho2 == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                         : 2.0 * F.multiplicities[s] / (rho2 * (1.0 + F.mu * rho2));
          ax += fac * dx;
          ay += fac * dy;
        }
        gx[k] = ax;
        gy[k] = ay;
      }
  }
  std::vector<double> dens(sz, 0.0);
  for (std::size_t k = 0; k < sz; ++k) {
    if (F.mask[k] != 1) continue;
    const double v = F.v(k), c = F.cf(k);
    const double s = std::exp(v);
    d.flux += field_strength(model, v, c);
    d.mass_integral += 1.0 - s;
    dens[k] = energy_density(model, v, gx[k] * gx[k] + gy[k] * gy[k], c);
  }
  fill_center_nodes(dens, n, F.kind == GeometryKind::torus);
  for (std::size_t k = 0; k < sz; ++k)
    if (F.mask[k] == 1) d.energy += dens[k];
  d.flux = d.flux * h * h + F.tail_flux;
  d.mass_integral = d.mass_integral * h * h + F.tail_mass;
  d.energy = d.energy * h * h + F.tail_energy;
  d.residual_norm = F.diag.residual_norm;
  return d;
}

double discrete_residual(const FieldGrid& F, const ModelSpec& model) {
  if (F.kind == GeometryKind::radial) {
    RadialSystem sys{model, F.N(), F.mu, F.h, F.r, {}, {}, {}};
    const std::size_t n = F.r.size();
    sys.cf.resize(n);
    sys.src.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      sys.cf[k] = F.cf(k);
      const double a = F.mu * F.r[k] * F.r[k];
      sys.src[k] = 4.0 * F.N() * F.mu / ((1.0 + a) * (1.0 + a));
    }
    sys.v0 = F.v0;
    const double mass = std::sqrt(sys.cf[n - 1] * vacuum_mass_sq(model));
    sys.robin = F.extent * mass * bessel_log_slope(mass * F.extent);
    std::vector<double> res;
    sys.residual(F.V, res, nullptr);
    return max_abs(res);
  }
  if (F.kind == GeometryKind::disk) {
    std::vector<double> v0, src;
    planar_background(F, v0, src);
    return disk_residual_norm(F, model, F.V, src);
  }
  TorusSpectral sp(F.n, F.n, F.extent, F.extent);
  return torus_residual(sp, F, model, F.V, 4.0 * pi * F.N() / (F.extent * F.extent));
}

} // namespace curvlab
