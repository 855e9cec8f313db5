#include "doctest.h"

#include "curvlab/conformal.hpp"
#include "curvlab/errors.hpp"
#include "curvlab/strings_exact.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace curvlab;
using std::numbers::pi;

namespace {

RationalMap make_map(cplx c, std::vector<cplx> poles, std::vector<cplx> zeros = {}) {
  RationalMap m;
  m.c = c;
  m.poles = std::move(poles);
  m.zeros = std::move(zeros);
  return m;
}

const cplx I(0, 1);

} // namespace

TEST_CASE("Letelier factor") {
  StringDistribution d;
  d.points = {{0, 0}};
  d.strengths = {1};
  d.G = 0.01;
  const auto f = letelier_factor(d);
  for (double r : {0.5, 1.0, 3.0, 10.0}) CHECK(f.value(r, 0) == doctest::Approx(std::pow(r, -0.08)).epsilon(1e-14));
  CHECK(f.value(0, 0) == std::numeric_limits<double>::infinity());
  CHECK(f.alpha == doctest::Approx(0.08));
  const auto rep = letelier_conical_report(d);
  CHECK(rep.deficit == doctest::Approx(0.08 * pi));
  CHECK(rep.deficit == doctest::Approx(0.2513).epsilon(1e-4));
  CHECK(rep.angle_range + rep.deficit == doctest::Approx(2 * pi).epsilon(1e-15));
  d.G = 0;
  CHECK(letelier_factor(d).value(2, 3) == 1.0);

  // harmonic away from the centers: curvature vanishes
  StringDistribution two;
  two.points = {{-1, 0}, {1.5, 0.5}};
  two.strengths = {0.7, 1.3};
  two.G = 0.02;
  two.lambda = 3;
  const auto f2 = letelier_factor(two);
  double kmax = 0;
  for (double x = -4; x <= 4; x += 0.37)
    for (double y = -4; y <= 4; y += 0.41) kmax = std::max(kmax, std::abs(gauss_curvature_conformal(f2.eta, x, y, 1e-3)));
  CHECK(kmax < 1e-6);

  StringDistribution bad = two;
  bad.strengths = {1, -1};
  CHECK_THROWS_AS(letelier_factor(bad), ValidationError);
  bad = two;
  bad.points = {{0, 0}, {0, 0}};
  CHECK_THROWS_AS(letelier_factor(bad), ValidationError);
}

TEST_CASE("rational maps: values, derivatives, Cauchy-Riemann") {
  const auto inv = make_map(1, {0});
  const auto v = rational_map_eval(inv, 1.0);
  CHECK(std::abs(v.u - cplx(1)) < 1e-15);
  CHECK(std::abs(v.du_dx1 - cplx(-1)) < 1e-15);
  CHECK(std::abs(v.du_dx1 + I * v.du_dx2) < 1e-14);
  CHECK(rational_map_eval(inv, 0.0).at_infinity);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3, 3);
  const auto m = make_map(cplx(0.3, -2), {cplx(0.5, 0.5), cplx(0.5, 0.5)}, {cplx(-1, 0.2)});
  for (int k = 0; k < 50; ++k) {
    const cplx z(U(rng), U(rng));
    const auto e = rational_map_eval(m, z);
    CHECK(std::abs(e.du_dx1 + I * e.du_dx2) < 1e-12 * (1 + std::abs(e.du_dx1)));
    // derivative against a centered difference of u
    const double h = 1e-6;
    const cplx fd = (rational_map_eval(m, z + h).u - rational_map_eval(m, z - h).u) / (2 * h);
    CHECK(std::abs(fd - e.du_dx1) < 1e-6 * (1 + std::abs(e.du_dx1)));
    // second-order sigma-model equation follows
    const auto r = sigma_model_residual(m, z);
    CHECK(std::abs(r) < 1e-8 * (1 + std::abs(e.du_dx1)));
  }
  CHECK_THROWS_AS(rational_map_eval(make_map(1, {0}, {1}), 2.0), ValidationError);  // N = M
  CHECK_THROWS_AS(rational_map_eval(make_map(0, {0}), 2.0), ValidationError);
}

TEST_CASE("grad u identity |grad u|^2 = e^v |grad v|^2 / 2 at random points") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> U(-2, 2);
  const auto m = make_map(cplx(1.5, 0.5), {cplx(0, 1), cplx(0, -1), cplx(1, 1)}, {cplx(1, 0)});
  for (int k = 0; k < 100; ++k) {
    const cplx z(U(rng), U(rng));
    const auto e = rational_map_eval(m, z);
    const double grad_u2 = std::norm(e.du_dx1) + std::norm(e.du_dx2);
    auto v = [&](cplx w) { return std::log(std::norm(rational_map_eval(m, w).u)); };
    const double h = 1e-4;
    auto d = [&](cplx dir) {
      return (-v(z + 2.0 * h * dir) + 8.0 * v(z + h * dir) - 8.0 * v(z - h * dir) + v(z - 2.0 * h * dir)) / (12 * h);
    };
    const double gv2 = std::pow(d(1.0), 2) + std::pow(d(I), 2);
    CHECK(grad_u2 == doctest::Approx(0.5 * std::norm(e.u) * gv2).epsilon(1e-8));
  }
}

TEST_CASE("degree and energy of simple maps") {
  const auto r1 = sigma_energy_and_degree(make_map(1, {0}), 200);
  CHECK(r1.N_detected == 1);
  CHECK(r1.degree_integral == doctest::Approx(4 * pi).epsilon(1e-4));
  CHECK(r1.energy == doctest::Approx(4 * pi).epsilon(1e-4));
  // closed form of the truncated energy: 4 pi R^2 / (1 + R^2)
  CHECK(r1.energy == doctest::Approx(4 * pi * 40000.0 / 40001.0).epsilon(1e-9));
  CHECK(r1.energy + r1.tail_estimate == doctest::Approx(4 * pi).epsilon(1e-7));

  const auto r5 = sigma_energy_and_degree(make_map(cplx(3, 4), {0}), 1000);
  CHECK(r5.N_detected == 1);
  CHECK(r5.degree_integral == doctest::Approx(4 * pi).epsilon(1e-4));
  CHECK(r5.energy == doctest::Approx(4 * pi).epsilon(1e-4));

  const auto r2 = sigma_energy_and_degree(make_map(1, {I, -I}, {1.0}), 300);
  CHECK(r2.N_detected == 2);
  CHECK(r2.degree_integral == doctest::Approx(8 * pi).epsilon(1e-3));
  CHECK(r2.energy == doctest::Approx(8 * pi).epsilon(1e-3));

  CHECK_THROWS_AS(sigma_energy_and_degree(make_map(1, {0}), 20), SolverError);  // tail too large
  CHECK_THROWS_AS(sigma_energy_and_degree(make_map(1, {5}), 8), ValidationError);
}

TEST_CASE("degree integral invariant under prefactor and translation") {
  const auto base = make_map(cplx(1, 0), {cplx(0.5, 0), cplx(-0.5, 0.3)}, {cplx(0, -0.4)});
  const double d0 = sigma_energy_and_degree(base, 300, 1e-3, 1e-3).degree_integral;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int k = 0; k < 3; ++k) {
    auto m = base;
    m.c = cplx(2 * U(rng) + 2.5, U(rng));
    const cplx shift(U(rng), U(rng));
    for (auto& p : m.poles) p += shift;
    for (auto& q : m.zeros) q += shift;
    const double d = sigma_energy_and_degree(m, 400, 1e-3, 1e-3).degree_integral;
    CHECK(std::abs(d - d0) / d0 < 5e-3);
  }
}

TEST_CASE("energy approaches 4 pi N as the radius grows, with the predicted tail") {
  const auto m = make_map(1, {cplx(0.3, 0), cplx(-0.2, 0.4)}, {cplx(0.1, 0.1)});
  double prev_gap = 1e9;
  for (double R : {10.0, 20.0, 40.0, 80.0}) {
    const auto r = sigma_energy_and_degree(m, R, 1e-3, 1.0);
    const double gap = 8 * pi - r.energy;
    CHECK(gap > 0);
    CHECK(gap < prev_gap);
    // tail O(R^-2) for N - M = 1
    CHECK(r.tail_estimate == doctest::Approx(gap).epsilon(0.05));
    prev_gap = gap;
  }
}

TEST_CASE("Comtet-Gibbons metric: regularity, bounds, total curvature") {
  const auto m = make_map(1, {0});
  const auto f = cg_string_metric(m, 0.001, 1.0);
  for (double r : {0.0, 0.5, 2.0, 7.0})
    CHECK(f.value(r, 0) == doctest::Approx(std::pow(r * r + 1, -16 * pi * 0.001)).epsilon(1e-14));
  CHECK(f.alpha == doctest::Approx(32 * pi * 0.001));
  CHECK(cg_string_metric(m, 0, 2.0).value(0.3, 0.1) == doctest::Approx(2.0));

  // global two-sided bounds against (1 + r)^(-32 pi N G)
  const auto f3 = cg_string_metric(make_map(2, {1, -1, I}, {0.5}), 0.002, 1.5);
  double lo = 1e300, hi = 0;
  for (double r = 0; r < 1e6; r = r * 1.3 + 0.01) {
    for (double t : {0.0, 1.0, 2.5, 4.0}) {
      const double q = f3.value(r * std::cos(t), r * std::sin(t)) / std::pow(1 + r, -f3.alpha);
      lo = std::min(lo, q), hi = std::max(hi, q);
    }
  }
  CHECK(lo > 0.1);
  CHECK(hi < 10);

  const auto rep = curvature_deficit_report(f, 1, 0.001);
  CHECK(rep.deficit == doctest::Approx(0.3158).epsilon(1e-3));
  CHECK(rep.total_curvature == doctest::Approx(rep.deficit).epsilon(1e-2));
  const auto r3 = curvature_deficit_report(cg_string_metric(make_map(1, {1, -1, I}), 0.001, 1), 3, 0.001);
  CHECK(r3.deficit == doctest::Approx(0.096 * pi * pi));
  CHECK(r3.total_curvature == doctest::Approx(r3.deficit).epsilon(2e-2));
  const auto r0 = curvature_deficit_report(cg_string_metric(m, 0, 1), 1, 0);
  CHECK(r0.deficit == 0);
  CHECK(std::abs(r0.total_curvature) < 1e-10);

  StringDistribution d;
  d.points = {{0, 0}};
  d.strengths = {1};
  d.G = 0.01;
  CHECK_THROWS_AS(curvature_deficit_report(letelier_factor(d), 1, 0.01), ValidationError);
}

TEST_CASE("geodesic completeness thresholds") {
  const auto h1 = completeness_check(1, 0.01, CompletenessMode::harmonic_map);
  CHECK(h1.threshold == doctest::Approx(1.989).epsilon(1e-3));
  CHECK(h1.complete);
  CHECK(h1.radial_length == std::numeric_limits<double>::infinity());
  const auto h2 = completeness_check(2, 0.01, CompletenessMode::harmonic_map);
  CHECK_FALSE(h2.complete);
  CHECK(h2.radial_length == doctest::Approx(1 / (h2.exponent - 1)).epsilon(1e-8));
  const auto l = completeness_check(1, 0.01, CompletenessMode::lohe, 2);
  CHECK(l.threshold == doctest::Approx(3.98).epsilon(1e-3));
  const auto b = completeness_check(1, 1 / (16 * pi), CompletenessMode::harmonic_map);
  CHECK(b.boundary);
  CHECK_FALSE(completeness_check(1, 0.019, CompletenessMode::harmonic_map).boundary);
  // partial lengths keep growing only when divergent
  CHECK(radial_length_partial(0.9, 1e12) - radial_length_partial(0.9, 1e6) > 10);
  CHECK(radial_length_partial(1.5, 1e12) - radial_length_partial(1.5, 1e6) < 1e-2);
  CHECK(radial_length_partial(2.0, 9.0) == doctest::Approx(0.9));
  CHECK_THROWS_AS(completeness_check(0, 0.01, CompletenessMode::harmonic_map), ValidationError);
}
