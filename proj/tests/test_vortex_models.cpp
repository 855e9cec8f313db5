#include "curvlab/errors.hpp"
#include "curvlab/vortex_models.hpp"

#include <doctest.h>

#include <cmath>
#include <map>

using namespace curvlab;

TEST_CASE("ah_classical closed forms") {
  const auto M = make_model("ah_classical");
  CHECK(M.family == ModelFamily::lohe);
  CHECK(M.tau == 1.0);
  for (double s : {0.0, 0.3, 1.0, 1.7}) {
    CHECK(M.f_current(s) == 0.5);
    CHECK(M.w(s) == doctest::Approx(0.5 * (1.0 - s)).epsilon(1e-15));
    CHECK(M.F_kinetic(s) == 1.0);
  }
  CHECK(consistency_check(M).max_residual < 1e-12);
}

TEST_CASE("gauged_sigma closed forms and quadrature oracle") {
  const auto M = make_model("gauged_sigma");
  CHECK(M.tau == 2.0);
  for (double s : {0.0, 0.5, 1.0, 2.0}) {
    CHECK(M.f_current(s) == doctest::Approx(2.0 / (1.0 + s)));
    CHECK(M.w(s) == doctest::Approx((1.0 - s) / (1.0 + s)));
    CHECK(M.F_kinetic(s) == doctest::Approx(4.0 / ((1.0 + s) * (1.0 + s))));
  }
  CHECK(consistency_check(M).max_residual < 1e-10);
}

TEST_CASE("chern_simons profiles at kappa = 1") {
  ModelParams p;
  p.kappa = 1.0;
  const auto M = make_model("chern_simons", p);
  CHECK(M.family == ModelFamily::dielectric);
  for (double s : {0.25, 1.0, 1.44}) {
    CHECK(M.h(s) == doctest::Approx(1.0 / (2.0 * std::sqrt(s))));
    CHECK(M.w(s) == doctest::Approx(std::sqrt(s) * (1.0 - s)));
  }
}

TEST_CASE("arctan_alpha passes the consistency check") {
  ModelParams p;
  p.alpha = 1.7;
  const auto M = make_model("arctan_alpha", p);
  CHECK(M.tau == doctest::Approx(1.7 * M_PI / 4.0));
  CHECK(consistency_check(M).max_residual < 1e-10);
}

TEST_CASE("every zoo member: vacuum normalisation, positivity, consistency") {
  for (const auto& name : model_names()) {
    for (int m : {1, 2, 3}) {
      ModelParams p;
      p.m = m;
      p.b = 0.3 * m;
      p.alpha = 0.5 * m;
      p.beta = 1.5 / m;
      p.kappa = 1.0 + 0.5 * m;
      CAPTURE(name);
      CAPTURE(m);
      const auto M = make_model(name, p);
      CHECK(M.w(1.0) == 0.0);
      for (int k = 0; k < 1000; ++k) {
        const double s = k / 1000.0;
        if (M.family == ModelFamily::dielectric && s == 0.0 && name != "dielectric_plus_m" &&
            name != "dielectric_inv_m")
          continue;  // w(0) = 0 when h blows up at the origin
        CHECK(M.w(s) > 0.0);
      }
      if (M.family == ModelFamily::lohe) {
        CHECK(std::abs(M.f_current(1.0) - 0.5 * M.tau) < 1e-12);
        for (int k = 1; k <= 1000; ++k) CHECK(M.F_kinetic(k / 1000.0) > 0.0);
      }
      CHECK(consistency_check(M).max_residual < 1e-8);
      CHECK(rhs_eval(M, 0.0) == 0.0);
    }
  }
}

TEST_CASE("rhs_eval printed forms") {
  const auto ah = make_model("ah_classical");
  const auto cs = make_model("chern_simons");
  for (double v : {-5.0, -1.0, -0.1, 0.0, 0.2}) {
    const double s = std::exp(v);
    CHECK(rhs_eval(ah, v) == doctest::Approx(s - 1.0).epsilon(1e-14));
    CHECK(rhs_eval(cs, v) == doctest::Approx(s * (s - 1.0)).epsilon(1e-14));
    CHECK(rhs_eval(ah, v, 3.0) == doctest::Approx(3.0 * (s - 1.0)).epsilon(1e-14));
  }
}

TEST_CASE("dielectric right-hand sides match their printed forms") {
  for (int m : {0, 1, 2, 3}) {
    for (double kappa : {2.0, 1.0, 3.5}) {
      ModelParams p;
      p.m = m;
      p.kappa = kappa;
      const double scale = 4.0 / (kappa * kappa);
      const auto a = make_model("dielectric_power", p);
      const auto b = make_model("dielectric_plus_m", p);
      const auto c = make_model("dielectric_inv_m", p);
      for (double v : {-4.0, -0.7, 0.0, 0.3}) {
        const double s = std::exp(v);
        CHECK(rhs_eval(a, v) == doctest::Approx(scale * std::exp(m * v) * (s - 1.0)).epsilon(1e-13));
        CHECK(rhs_eval(b, v) == doctest::Approx(scale * std::pow(1.0 + s, m) * (s - 1.0)).epsilon(1e-13));
        CHECK(rhs_eval(c, v) == doctest::Approx(scale * (s - 1.0) / std::pow(1.0 + s, m)).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("rhs derivative agrees with differences") {
  for (const auto& name : model_names()) {
    ModelParams p;
    p.m = 2;
    const auto M = make_model(name, p);
    for (double v : {-6.0, -2.0, -0.5, 0.0, 0.4}) {
      const double h = 1e-5;
      const double fd = (rhs_eval(M, v + h, 1.3) - rhs_eval(M, v - h, 1.3)) / (2 * h);
      CAPTURE(name);
      CAPTURE(v);
      CHECK(rhs_dv(M, v, 1.3) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("monotonicity flags") {
  auto flag = [](const std::string& name, int m) {
    ModelParams p;
    p.m = m;
    return make_model(name, p).rhs_monotone;
  };
  for (const char* name : {"ah_classical", "gauged_sigma", "log_b", "arctan_alpha", "sinh_beta"}) CHECK(flag(name, 1));
  for (int m : {1, 2, 4}) {
    CHECK(flag("power_m", m));
    CHECK(flag("flip_m", m));
    CHECK(flag("dielectric_inv_m", m));
    CHECK_FALSE(flag("dielectric_power", m));
  }
  CHECK(flag("dielectric_inv_m", 0));
  CHECK(flag("dielectric_power", 0));
  CHECK(flag("dielectric_plus_m", 1));
  CHECK_FALSE(flag("dielectric_plus_m", 2));
  CHECK_FALSE(flag("chern_simons", 1));
}

TEST_CASE("metric potential against independent closed forms") {
  // 2 int_0^1 f for the models whose primitive is computed by quadrature.
  ModelParams p;
  CHECK(make_model("log_b", p).metric_potential(1.0) == doctest::Approx(2 * 0.4112335167120566).epsilon(1e-13));
  CHECK(make_model("arctan_alpha", p).metric_potential(1.0) == doctest::Approx(2 * 0.4579827970886095).epsilon(1e-13));
  CHECK(make_model("sinh_beta", p).metric_potential(1.0) == doctest::Approx(2 * 0.4498169679770496).epsilon(1e-13));
  p.b = 0.5;
  CHECK(make_model("log_b", p).metric_potential(2.0) == doctest::Approx(2 * 1.184969898499183).epsilon(1e-12));
  CHECK(make_model("ah_classical").metric_potential(0.7) == doctest::Approx(0.7));
  CHECK(make_model("chern_simons").metric_potential(0.7) == doctest::Approx(0.7));
  CHECK(make_model("gauged_sigma").metric_potential(1.0) == doctest::Approx(4.0 * std::log(2.0)));
}

TEST_CASE("vacuum mass and energy density") {
  CHECK(vacuum_mass_sq(make_model("ah_classical")) == doctest::Approx(1.0));
  CHECK(vacuum_mass_sq(make_model("gauged_sigma")) == doctest::Approx(1.0));
  CHECK(vacuum_mass_sq(make_model("chern_simons")) == doctest::Approx(1.0));
  ModelParams p;
  p.m = 3;
  CHECK(vacuum_mass_sq(make_model("dielectric_inv_m", p)) == doctest::Approx(0.125));
  const auto ah = make_model("ah_classical");
  CHECK(energy_density(ah, 0.0, 0.0, 1.0) == 0.0);
  CHECK(energy_density(ah, std::log(0.5), 2.0, 1.0) == doctest::Approx(0.0625 + 0.25));
}

TEST_CASE("invalid models") {
  CHECK_THROWS_AS(make_model("nonexistent"), ValidationError);
  ModelParams p;
  p.m = 0;
  CHECK_THROWS_AS(make_model("power_m", p), ValidationError);
  CHECK_THROWS_AS(make_model("flip_m", p), ValidationError);
  p = {};
  p.b = 0.0;
  CHECK_THROWS_AS(make_model("log_b", p), ValidationError);
  p = {};
  p.kappa = -1.0;
  CHECK_THROWS_AS(make_model("chern_simons", p), ValidationError);
  p = {};
  p.alpha = NAN;
  CHECK_THROWS_AS(make_model("arctan_alpha", p), ValidationError);
}

TEST_CASE("a broken profile is rejected") {
  auto M = make_model("ah_classical");
  M.F_kinetic = [](double) { return 1.0 + 1e-6; };
  CHECK_THROWS_AS(consistency_check(M), InconsistencyError);
}
