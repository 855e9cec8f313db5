#pragma once

#include <functional>
#include <string>
#include <vector>

namespace curvlab {

enum class ModelFamily { lohe, dielectric };

// Parameters of the zoo. Only the ones a model uses are read; the others
// keep their defaults. kappa = 2 makes the dielectric right-hand sides
// coincide with their unscaled printed forms.
struct ModelParams {
  int m = 1;
  double b = 1.0;
  double alpha = 1.0;
  double beta = 1.0;
  double kappa = 2.0;
};

// Profiles of s = |u|^2, all defined on [0, 2]. Immutable after make_model.
struct ModelSpec {
  std::string name;
  ModelFamily family = ModelFamily::lohe;
  ModelParams params;
  double tau = 1.0;  // Chern-class weight; energy = pi tau N

  std::function<double(double)> w;          // potential profile, w(1) = 0
  std::function<double(double)> F_kinetic;  // kinetic profile (1 for the dielectric family)
  // Lohe family: current profile f and its primitive h_int(s) = int_0^s f.
  std::function<double(double)> f_current;
  std::function<double(double)> h_int;
  // Dielectric family: h, and 1/h^2 with its s-derivative (finite where h blows up).
  std::function<double(double)> h;
  std::function<double(double)> inv_h2;
  std::function<double(double)> inv_h2_ds;

  // rhs_eval is nondecreasing in v on (-inf, 0]; decided by dense sampling.
  bool rhs_monotone = false;

  // Primitive used in the gravitational metric factor, 2 * int_0^s f for the
  // Lohe family and s for the dielectric one.
  double metric_potential(double s) const;
};

const std::vector<std::string>& model_names();

ModelSpec make_model(const std::string& name, const ModelParams& params = {});

struct ConsistencyReport {
  double max_residual;
  std::string worst_check;
};
// Throws InconsistencyError above 1e-8.
ConsistencyReport consistency_check(const ModelSpec& model);

// Right-hand side of Laplacian(v) = rhs away from the vortex centers, without
// the coupling lambda: Lohe -2 c w(e^v), dielectric c (e^v - 1) / h^2(e^v).
double rhs_eval(const ModelSpec& model, double v, double conformal_factor = 1.0);
// d rhs / dv.
double rhs_dv(const ModelSpec& model, double v, double conformal_factor = 1.0);

// F12 = -(1/2) Laplacian(v) for the upper sign, i.e. -(1/2) rhs.
inline double field_strength(const ModelSpec& model, double v, double conformal_factor) {
  return -0.5 * rhs_eval(model, v, conformal_factor);
}

// Reduced energy density e^eta H = c w^2 + F s |grad v|^2 / 4 at a BPS solution.
double energy_density(const ModelSpec& model, double v, double grad_v_sq, double conformal_factor);

// Far-field mass: linearisation Laplacian(v) = mass^2 v about the vacuum.
double vacuum_mass_sq(const ModelSpec& model);

} // namespace curvlab
