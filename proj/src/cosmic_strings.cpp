#include "curvlab/cosmic_strings.hpp"

#include "curvlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace curvlab {

namespace {

constexpr double pi = std::numbers::pi;

bool same_sources(const FieldGrid& F, const StringConfiguration& cfg) {
  if (F.kind == GeometryKind::radial) {
    return cfg.points.size() == 1 && cfg.multiplicities[0] == F.N();
  }
  if (F.centers.size() != cfg.points.size()) return false;
  for (std::size_t s = 0; s < cfg.points.size(); ++s) {
    if (F.multiplicities[s] != cfg.multiplicities[s]) return false;
    if (std::abs(F.centers[s].x - cfg.points[s].x) > 1e-12 || std::abs(F.centers[s].y - cfg.points[s].y) > 1e-12)
      return false;
  }
  return true;
}

double second_derivative4(const std::vector<double>& f, std::size_t k, double dx) {
  const std::size_t n = f.size();
  if (k >= 2 && k + 2 < n)
    return (-f[k - 2] + 16 * f[k - 1] - 30 * f[k] + 16 * f[k + 1] - f[k + 2]) / (12 * dx * dx);
  if (k < 2)
    return (45 * f[k] - 154 * f[k + 1] + 214 * f[k + 2] - 156 * f[k + 3] + 61 * f[k + 4] - 10 * f[k + 5]) /
           (12 * dx * dx);
  return (45 * f[k] - 154 * f[k - 1] + 214 * f[k - 2] - 156 * f[k - 3] + 61 * f[k - 4] - 10 * f[k - 5]) /
         (12 * dx * dx);
}

double first_derivative4(const std::vector<double>& f, std::size_t k, double dx) {
  const std::size_t n = f.size();
  if (k >= 2 && k + 2 < n) return (f[k - 2] - 8 * f[k - 1] + 8 * f[k + 1] - f[k + 2]) / (12 * dx);
  if (k < 2) return (-25 * f[k] + 48 * f[k + 1] - 36 * f[k + 2] + 16 * f[k + 3] - 3 * f[k + 4]) / (12 * dx);
  return (25 * f[k] - 48 * f[k - 1] + 36 * f[k - 2] - 16 * f[k - 3] + 3 * f[k - 4]) / (12 * dx);
}

double simpson(const std::vector<double>& f, double dx) {
  const std::size_t n = f.size();
  double s = f[0] + f[n - 1];
  for (std::size_t k = 1; k + 1 < n; ++k) s += (k % 2 ? 4.0 : 2.0) * f[k];
  return s * dx / 3.0;
}

void radial_curvature(GravitatingSolution& S, const ModelSpec& model) {
  const FieldGrid& F = S.field;
  const std::size_t n = F.r.size();
  const double dt = F.h;
  const int N = F.N();
  std::vector<double> dens(n), v(n), P(n), Vt(n);
  for (std::size_t k = 0; k < n; ++k) {
    v[k] = F.v(k);
    P[k] = model.metric_potential(std::exp(v[k]));
  }
  double defect = 0.0, tl_defect = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = F.r[k], r2 = r * r;
    const double a = F.mu * r2;
    // K e^eta r^2 = -(1/2) eta_tt
    dens[k] = -0.5 * second_derivative4(S.eta, k, dt);
    const double vt = first_derivative4(F.V, k, dt) + 2.0 * N / (1.0 + a);
    const double eH = energy_density(model, v[k], vt * vt / r2, F.cf(k));
    if (r >= 0.05) {
      defect = std::max(defect, std::abs(dens[k] / r2 - 8.0 * pi * S.G * eH));
      const double vtt = second_derivative4(F.V, k, dt) - 4.0 * N * a / ((1.0 + a) * (1.0 + a));
      const double rhs = (0.5 * second_derivative4(P, k, dt) - 0.5 * model.tau * vtt) / r2;
      tl_defect = std::max(tl_defect, std::abs(2.0 * eH - rhs));
    }
  }
  std::vector<double> integrand(n);
  for (std::size_t k = 0; k < n; ++k) integrand[k] = 2.0 * pi * dens[k];
  S.total_curvature = simpson(integrand, dt);
  // Beyond r_max the density decays like the square of the vacuum mode.
  const std::size_t e = n - 1;
  const double mass = std::sqrt(F.cf(e) * vacuum_mass_sq(model));
  S.curvature_tail = 2.0 * pi * F.r[e] * std::abs(dens[e]) / (F.r[e] * F.r[e]) / (2.0 * mass);
  S.total_curvature += S.curvature_tail;
  S.reduction_defect = defect;
  S.total_laplacian_defect = tl_defect;
}

void disk_curvature(GravitatingSolution& S) {
  const FieldGrid& F = S.field;
  const int n = F.n;
  double total = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) {
      const int k = i * n + j;
      if (F.mask[k] != 1) continue;
      const double lap = (S.eta[k - n] + S.eta[k + n] + S.eta[k - 1] + S.eta[k + 1] - 4.0 * S.eta[k]) / (F.h * F.h);
      total += -0.5 * lap;
    }
  S.curvature_tail = 8.0 * pi * S.G * F.tail_energy;
  S.total_curvature = total * F.h * F.h + S.curvature_tail;
}

} // namespace

std::vector<double> metric_factor_from_v(const FieldGrid& F, const ModelSpec& model, const StringConfiguration& cfg,
                                         double G, double lambda) {
  if (!(G >= 0.0) || !std::isfinite(G)) throw ValidationError("G must be finite and >= 0");
  if (!(lambda > 0.0)) throw ValidationError("metric constant lambda must be positive");
  if (F.kind == GeometryKind::torus) throw ValidationError("the metric factor is defined on the plane only");
  if (!same_sources(F, cfg))
    throw ValidationError("singularity mismatch: the log poles of v do not match the string configuration");
  const double tau = model.tau;
  const double lg = std::log(lambda);
  std::vector<double> eta(F.v0.size());
  if (F.kind == GeometryKind::radial) {
    const int N = F.N();
    for (std::size_t k = 0; k < eta.size(); ++k) {
      const double a = F.mu * F.r[k] * F.r[k];
      // v - 2 N ln r = V + N ln mu - N ln(1 + mu r^2)
      const double reg = F.V[k] + N * (std::log(F.mu) - std::log1p(a));
      eta[k] = lg + 4.0 * pi * G * (tau * reg - model.metric_potential(std::exp(F.v(k))));
    }
    return eta;
  }
  const int n = F.n;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int k = i * n + j;
      double reg = F.V[k];
      for (std::size_t s = 0; s < F.centers.size(); ++s) {
        const double dx = F.x(i) - F.centers[s].x, dy = F.y(j) - F.centers[s].y;
        reg += F.multiplicities[s] * (std::log(F.mu) - std::log1p(F.mu * (dx * dx + dy * dy)));
      }
      const double s = std::exp(F.v(k));
      eta[k] = lg + 4.0 * pi * G * (tau * reg - model.metric_potential(std::isfinite(s) ? s : 0.0));
    }
  return eta;
}

GravitatingSolution gravitating_solve(const ModelSpec& model, const StringConfiguration& cfg, double G,
                                      const GravitatingOptions& o) {
  cfg.validate();
  const int N = cfg.total();
  if (!(G >= 0.0) || !std::isfinite(G)) throw ValidationError("G must be finite and >= 0");
  if (4.0 * pi * G > 0.1) throw ValidationError("4 pi G = " + fmt_sci(4.0 * pi * G) + " exceeds the supported 0.1");
  if (8.0 * pi * model.tau * N * G >= 2.0)
    throw ValidationError("8 pi tau N G >= 2: the curvature is not integrable");

  GravitatingSolution S;
  S.G = G;
  S.lambda = cfg.lambda;
  S.tau = model.tau;
  const bool radial = cfg.points.size() == 1;

  auto flat_solve = [&](const std::vector<double>& cf, const FieldGrid* prev) {
    if (radial) return radial_solve(model, N, cfg.lambda, o.radial, cf, prev);
    return planar_solve_with_factor(model, cfg, o.planar, cf, prev);
  };

  FieldGrid cur = flat_solve({}, nullptr);
  for (int j = 0; j < o.max_outer; ++j) {
    std::vector<double> eta = metric_factor_from_v(cur, model, cfg, G, cfg.lambda);
    std::vector<double> cf(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) cf[k] = std::exp(eta[k]);
    FieldGrid next = flat_solve(cf, &cur);
    double diff = 0.0;
    for (std::size_t k = 0; k < next.V.size(); ++k)
      if (next.kind == GeometryKind::radial || next.mask[k] == 1) diff = std::max(diff, std::abs(next.V[k] - cur.V[k]));
    S.history.push_back(diff);
    cur = std::move(next);
    S.outer_iterations = j + 1;
    if (diff < o.tol) break;
    if (j + 1 == o.max_outer) {
      std::string hist;
      for (double h : S.history) hist += " " + fmt_sci(h);
      throw SolverError("gravitating outer iteration stagnated; history:" + hist);
    }
  }
  S.field = std::move(cur);
  S.eta = metric_factor_from_v(S.field, model, cfg, G, cfg.lambda);

  S.energy = S.field.diag.energy;
  S.bps_energy = pi * model.tau * N;
  S.deficit = 8.0 * pi * pi * model.tau * N * G;
  S.threshold = G > 0.0 ? 1.0 / (4.0 * pi * model.tau * G) : std::numeric_limits<double>::infinity();
  S.complete = N <= S.threshold;
  if (radial)
    radial_curvature(S, model);
  else
    disk_curvature(S);
  if (S.deficit > 0.0 && S.curvature_tail > 0.005 * S.deficit)
    S.field.warnings.push_back("curvature tail beyond the mesh exceeds 0.5% of the deficit");
  return S;
}

StringReport string_report(const GravitatingSolution& S) {
  return {S.deficit, S.energy, S.total_curvature, S.complete, S.threshold};
}

} // namespace curvlab
