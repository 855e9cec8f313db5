#include "curvlab/errors.hpp"
#include "curvlab/vortex_solvers.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace curvlab;

namespace {

StringConfiguration single(int N = 1, double lambda = 1.0) {
  StringConfiguration c;
  c.points = {{0.0, 0.0}};
  c.multiplicities = {N};
  c.lambda = lambda;
  return c;
}

ModelSpec zoo(const std::string& name, int m) {
  ModelParams p;
  p.m = m;
  return make_model(name, p);
}

int node(const FieldGrid& F, double x) { return static_cast<int>(std::lround((x - F.x0) / F.h)); }

double disk_v(const FieldGrid& F, double x, double y) { return F.v(node(F, x) * F.n + node(F, y)); }

} // namespace

TEST_CASE("radial ah_classical: mass identity and residual") {
  const auto F = radial_solve(make_model("ah_classical"), 1, 1.0);
  CHECK(F.diag.residual_norm < 1e-8);
  CHECK(F.diag.mass_integral == doctest::Approx(4.0 * M_PI).epsilon(5e-3));
  CHECK(F.diag.flux == doctest::Approx(2.0 * M_PI).epsilon(1e-3));
  CHECK(F.diag.energy == doctest::Approx(M_PI).epsilon(1e-3));
  CHECK(F.warnings.empty());
}

TEST_CASE("radial chern_simons and gauged_sigma examples") {
  const auto cs = radial_solve(make_model("chern_simons"), 1, 1.0);
  CHECK(cs.diag.flux == doctest::Approx(2.0 * M_PI).epsilon(5e-3));
  const auto gs = radial_solve(make_model("gauged_sigma"), 1, 1.0);
  CHECK(gs.diag.energy == doctest::Approx(2.0 * M_PI).epsilon(1e-2));
}

TEST_CASE("every zoo model: negative monotone profile, quantized flux, BPS energy") {
  for (const auto& name : model_names()) {
    for (int m : {1, 2}) {
      const auto M = zoo(name, m);
      for (int N : {1, 2}) {
        CAPTURE(name);
        CAPTURE(m);
        CAPTURE(N);
        const auto F = radial_solve(M, N, 1.0);
        CHECK(F.diag.residual_norm < 1e-8);
        CHECK(std::abs(F.diag.flux / (2.0 * M_PI * N) - 1.0) < 1e-2);
        CHECK(std::abs(F.diag.energy / (M.tau * M_PI * N) - 1.0) < 1e-2);
        bool negative = true, increasing = true;
        for (std::size_t k = 0; k < F.r.size(); ++k) {
          negative = negative && F.v(k) < 0.0;
          if (k > 0) increasing = increasing && F.v(k) >= F.v(k - 1);
        }
        CHECK(negative);
        CHECK(increasing);
      }
    }
  }
}

TEST_CASE("radial profile is independent of the background scale") {
  const auto M = make_model("ah_classical");
  RadialOptions o;
  const auto ref = radial_solve(M, 2, 1.0, o);
  for (double mu : {0.5, 2.0}) {
    o.mu = mu;
    const auto F = radial_solve(M, 2, 1.0, o);
    for (double r : {0.01, 0.3, 1.0, 3.0, 8.0}) CHECK(radial_value(F, r) == doctest::Approx(radial_value(ref, r)).epsilon(1e-7));
  }
}

TEST_CASE("F12 equals minus half the Laplacian of v away from the center") {
  for (const char* name : {"ah_classical", "chern_simons", "log_b"}) {
    const auto M = make_model(name);
    const auto F = radial_solve(M, 1, 1.0);
    const double dt = F.h;
    double worst = 0.0;
    for (std::size_t k = 2; k + 2 < F.r.size(); ++k) {
      const double r = F.r[k];
      if (r < 0.05) continue;
      auto v = [&](std::size_t j) { return F.v(j); };
      const double vtt = (-v(k - 2) + 16 * v(k - 1) - 30 * v(k) + 16 * v(k + 1) - v(k + 2)) / (12 * dt * dt);
      worst = std::max(worst, std::abs(field_strength(M, F.v(k), 1.0) + 0.5 * vtt / (r * r)));
    }
    CAPTURE(name);
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("planar single center agrees with the radial solution") {
  const auto M = make_model("ah_classical");
  const auto rad = radial_solve(M, 1, 1.0);
  PlanarOptions o;
  o.R = 10.0;
  o.h = 0.1;
  const auto coarse = planar_solve(M, single(), o);
  o.h = 0.05;
  const auto fine = planar_solve(M, single(), o);
  CHECK(coarse.diag.residual_norm < 1e-6);
  CHECK(fine.diag.residual_norm < 1e-6);
  double raw = 0.0, extrap = 0.0;
  for (double x : {0.5, 1.0, 2.0, 4.0}) {
    for (auto [px, py] : {std::pair{x, 0.0}, std::pair{0.0, -x}}) {
      const double exact = radial_value(rad, x);
      const double a = disk_v(coarse, px, py), b = disk_v(fine, px, py);
      raw = std::max(raw, std::abs(b - exact));
      // second-order scheme: one Richardson step
      extrap = std::max(extrap, std::abs((4.0 * b - a) / 3.0 - exact));
    }
  }
  CHECK(raw < 1e-3);
  CHECK(extrap < 1e-4);
}

TEST_CASE("planar truncation error is second order") {
  const auto M = make_model("ah_classical");
  const auto rad = radial_solve(M, 1, 1.0);
  std::vector<double> res;
  for (double h : {0.2, 0.1}) {
    PlanarOptions o;
    o.R = 8.0;
    o.h = h;
    auto F = planar_solve(M, single(), o);
    for (int i = 0; i < F.n; ++i)
      for (int j = 0; j < F.n; ++j) {
        const int k = i * F.n + j;
        if (F.mask[k] != 1) continue;
        const double rho = std::hypot(F.x(i), F.y(j));
        F.V[k] = rho == 0.0 ? rad.V[0] : radial_value(rad, rho) - F.v0[k];
      }
    res.push_back(discrete_residual(F, M));
  }
  const double order = std::log2(res[0] / res[1]);
  CAPTURE(res[0]);
  CAPTURE(res[1]);
  CHECK(order > 1.8);
  CHECK(order < 2.3);
}

TEST_CASE("two separated centers: flux and mass add up") {
  const auto M = make_model("ah_classical");
  StringConfiguration c;
  c.points = {{-3.0, 0.0}, {3.0, 0.0}};
  c.multiplicities = {1, 1};
  PlanarOptions o;
  o.h = 0.2;
  const auto F = planar_solve(M, c, o);
  const auto one = radial_solve(M, 1, 1.0);
  CHECK(F.diag.residual_norm < 1e-6);
  CHECK(F.diag.flux == doctest::Approx(4.0 * M_PI).epsilon(1e-2));
  CHECK(F.diag.mass_integral == doctest::Approx(2.0 * one.diag.mass_integral).epsilon(1e-2));
  CHECK(F.N() == 2);
}

TEST_CASE("planar errors") {
  const auto M = make_model("ah_classical");
  StringConfiguration c;
  c.points = {{2.95, 0.0}};
  c.multiplicities = {1};
  PlanarOptions o;
  o.R = 3.0;
  CHECK_THROWS_AS(planar_solve(M, c, o), ValidationError);
  c.points = {{0.0, 0.0}, {0.0, 0.0}};
  c.multiplicities = {1, 1};
  CHECK_THROWS_AS(planar_solve(M, c), ValidationError);
  c.points = {{0.0, 0.0}};
  c.multiplicities = {0};
  CHECK_THROWS_AS(planar_solve(M, c), ValidationError);
  c.multiplicities = {1};
  c.lambda = -1.0;
  CHECK_THROWS_AS(planar_solve(M, c), ValidationError);
}

TEST_CASE("vacuum field has no flux and no energy") {
  PlanarOptions o;
  o.R = 5.0;
  o.h = 0.25;
  auto F = planar_solve(make_model("ah_classical"), single(), o);
  F.centers.clear();
  F.multiplicities.clear();
  std::fill(F.v0.begin(), F.v0.end(), 0.0);
  std::fill(F.V.begin(), F.V.end(), 0.0);
  F.tail_flux = F.tail_energy = F.tail_mass = 0.0;
  const auto d = diagnostics(F, make_model("ah_classical"));
  CHECK(d.flux == 0.0);
  CHECK(d.energy == 0.0);
  CHECK(d.mass_integral == 0.0);
}

TEST_CASE("monotone sandwich for dielectric_inv_m") {
  PlanarOptions o;
  o.R = 10.0;
  o.h = 0.2;
  for (int m : {1, 2}) {
    const auto M = zoo("dielectric_inv_m", m);
    const auto S = monotone_sandwich_solve(M, single(), o);
    CAPTURE(m);
    CHECK(S.field.diag.residual_norm < 1e-6);
    CHECK(S.iterations > 0);
    CHECK(S.comparison_factor == doctest::Approx(1.0 / std::pow(2.0, m)));
    bool strict = true;
    for (std::size_t k = 0; k < S.field.V.size(); ++k) {
      if (S.field.mask[k] != 1 || !std::isfinite(S.field.v0[k])) continue;
      strict = strict && S.lower.v(k) < S.field.v(k) && S.field.v(k) < 0.0;
    }
    CHECK(strict);
    CHECK(std::abs(S.field.diag.flux / (2.0 * M_PI) - 1.0) < 1e-2);
  }
}

TEST_CASE("sandwich at m = 0 reproduces the Newton solution") {
  PlanarOptions o;
  o.R = 10.0;
  o.h = 0.2;
  const auto M = zoo("dielectric_inv_m", 0);
  const auto S = monotone_sandwich_solve(M, single(), o);
  const auto N = planar_solve(M, single(), o);
  double d = 0.0;
  for (std::size_t k = 0; k < N.V.size(); ++k)
    if (N.mask[k] == 1) d = std::max(d, std::abs(S.field.V[k] - N.V[k]));
  CHECK(d < 1e-6);
}

TEST_CASE("sandwich rejects non-monotone models") {
  CHECK_THROWS_AS(monotone_sandwich_solve(make_model("chern_simons"), single()), ValidationError);
}

TEST_CASE("torus source function has log-slope 2 mult at a center") {
  const double L = 10.0;
  const int n = 256;
  StringConfiguration c;
  c.points = {{5.0, 5.0}};
  c.multiplicities = {2};
  const auto f = torus_source_function(L, n, c);
  const double h = L / n;
  const int ci = 128;
  CHECK(std::isinf(f[ci * n + ci]));
  const double a = f[(ci + 1) * n + ci], b = f[(ci + 8) * n + ci];
  CHECK((b - a) / std::log(8.0) == doctest::Approx(4.0).epsilon(1e-2));
  (void)h;
}

TEST_CASE("compact solve on the flat torus") {
  const auto M = make_model("ah_classical");
  StringConfiguration c;
  c.points = {{5.0, 5.0}};
  c.multiplicities = {1};
  const auto R = compact_solve(10.0, M, c, 64);
  CHECK(R.field.diag.mass_integral == doctest::Approx(4.0 * M_PI).epsilon(1e-2));
  CHECK(R.constraint == doctest::Approx(R.target).epsilon(1e-2));
  CHECK(R.target == doctest::Approx(2.0 * M_PI));
  c.points = {{1.5, 1.5}};
  CHECK_THROWS_AS(compact_solve(3.0, M, c, 64), SolvabilityError);
  try {
    compact_solve(3.0, M, c, 64);
  } catch (const SolvabilityError& e) {
    CHECK(std::string(e.what()).find("no solution at this area/lambda") != std::string::npos);
  }
}
