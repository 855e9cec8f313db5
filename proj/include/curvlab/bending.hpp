#pragma once

#include "curvlab/surface_geom.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace curvlab {

// Coupling constants of the bending functionals. Only the fields a given
// operation needs must be set; a missing one is reported by name.
//
// `lambda` is the surface tension multiplying the area. `Lambda` is the
// separate constant of the linear-curvature functional; in the Helfrich limit
// it relates to lambda by Lambda = lambda + kappa c0^2 / 2, which is offered
// as a helper and never substituted silently.
struct BendingParams {
  std::optional<double> kappa;
  std::optional<double> kappa1, kappa2;
  std::optional<double> kappa_plus, kappa_minus;
  std::optional<double> c0;
  std::optional<double> p;
  std::optional<double> lambda;
  std::optional<double> Lambda;
  std::optional<double> xi1, xi2;

  double omega() const;          // kappa1 + kappa2
  double moduli_gap() const;     // |kappa1 - kappa2|
  double gamma() const;          // kappa1 / kappa2
  double xi() const;             // (xi1 + xi2) / 2
  double zeta() const;           // xi1 - xi2
  double Lambda_helfrich_limit() const;
};

double require(const std::optional<double>& value, const char* name, const std::string& context);

enum class BendingKind { willmore, helfrich, canham, membrane, anisotropic };
BendingKind parse_bending_kind(const std::string& name);
std::string to_string(BendingKind kind);

double bending_energy(const ParamSurface& surface, const BendingParams& params, BendingKind kind);

// Pointwise densities of the anisotropic energy in its two forms:
// (kappa1 k1^2 + kappa2 k2^2)/2 and the (omega, gap) form with the sign
// chosen by which modulus pairs with the larger principal curvature.
struct AnisotropicForms {
  std::vector<double> moduli_form;
  std::vector<double> mean_gauss_form;
  double max_abs_difference = 0.0;
};
AnisotropicForms anisotropic_density_forms(const CurvatureField& field, const BendingParams& params);

double helfrich_torus_closed_form(double a, double tau, double kappa, double c0);

// h(a, tau) such that bending + pressure + tension energy = 2 pi^2 h.
double full_helfrich_h(double a, double tau, const BendingParams& params);
double full_helfrich_dh_da(double a, double tau, const BendingParams& params);
double full_helfrich_torus(double a, double tau, const BendingParams& params);

struct TorusMinimum {
  double a0, b0, tau0, beta0, energy;
  std::pair<double, double> bracket;
  int iterations;
};
TorusMinimum minimize_full_helfrich_torus(const BendingParams& params);
// a that minimizes h(., tau) for fixed tau.
double helfrich_torus_optimal_a(double tau, const BendingParams& params);

struct SphereMinimum {
  double R0;
  double energy;
  double printed_formula_R0;  // closed form with the radicand exactly as printed; may be negative or NaN
  double positive_root_R0;    // positive root of p R^2 + (2 lambda + kappa c0^2) R + 2 kappa c0
};
double full_helfrich_sphere_energy(double R, const BendingParams& params);
SphereMinimum minimize_full_helfrich_sphere(const BendingParams& params);

struct AnisotropicTorusMinimum {
  double tau_min;
  double U_min;
  int iterations;
};
AnisotropicTorusMinimum anisotropic_torus_minimum(double kappa1, double kappa2);
// f(tau) with U(torus) = 2 pi^2 kappa2 f(tau).
double anisotropic_torus_profile(double tau, double gamma);

struct EnergyBounds {
  double lower, upper;
};
EnergyBounds topological_bounds(int genus, double kappa1, double kappa2);

struct ShapeResidual {
  std::vector<double> field;
  double norm;
};
ShapeResidual shape_residual(const ParamSurface& surface, const BendingParams& params);

} // namespace curvlab
