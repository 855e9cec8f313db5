#pragma once

#include "curvlab/strings_exact.hpp"
#include "curvlab/vortex_models.hpp"

#include <string>
#include <vector>

namespace curvlab {

// Vortex centers with positive multiplicities, coupling lambda > 0.
struct StringConfiguration {
  std::vector<Point2> points;
  std::vector<int> multiplicities;
  double lambda = 1.0;

  int total() const;
  void validate() const;
};

enum class GeometryKind { radial, disk, torus };

struct SolveDiagnostics {
  double residual_norm = 0.0;
  double flux = 0.0;
  double energy = 0.0;          // quadrature of the reduced density
  double bps_energy = 0.0;      // pi tau N
  double mass_integral = 0.0;   // int (1 - e^v)
  int iterations = 0;
};

// v = v0 + V on one of three geometries.
//  radial: nodes r[k] on a logarithmic mesh, all vorticity at the origin.
//  disk:   n x n nodes of [-R, R]^2 with spacing h; mask marks unknowns
//          (strictly inside the disk), ring marks the Dirichlet nodes.
//  torus:  n x n nodes of [0, L)^2.
// Row-major index i*n + j with x = x0 + i h, y = y0 + j h.
struct FieldGrid {
  GeometryKind kind = GeometryKind::radial;
  std::string model;
  double lambda = 1.0;
  double mu = 1.0;  // background scale of v0
  double mass_sq = 0.0;  // vacuum_mass_sq of the model, for far-field continuation
  std::vector<Point2> centers;
  std::vector<int> multiplicities;

  std::vector<double> r;  // radial only
  int n = 0;
  double h = 0.0, x0 = 0.0, y0 = 0.0;
  double extent = 0.0;  // r_max, disk radius R or torus side L
  std::vector<unsigned char> mask;

  std::vector<double> v0, V;
  // Conformal factor multiplying the model right-hand side, lambda e^eta;
  // empty means the constant lambda.
  std::vector<double> conformal;

  // Disk only: flux, energy and mass outside the disk, from the radial
  // profiles that supply the boundary data.
  double tail_flux = 0.0, tail_energy = 0.0, tail_mass = 0.0;

  SolveDiagnostics diag;
  std::vector<std::string> warnings;

  int N() const;
  double v(std::size_t k) const { return v0[k] + V[k]; }
  double cf(std::size_t k) const { return conformal.empty() ? lambda : conformal[k]; }
  double x(int i) const { return x0 + i * h; }
  double y(int j) const { return y0 + j * h; }
};

struct RadialOptions {
  double r_max = 0.0;  // 0: chosen from the vacuum mass
  int n = 0;           // 0: 3001
  double r_min = 1e-6;
  double mu = 1.0;
  double tol = 1e-10;     // Newton target
  double accept = 1e-8;   // stagnation below this counts as converged
  int max_newton = 60;
};

// Radial mesh r_k and the nodal conformal factor lambda e^eta, when the caller
// provides one (gravitating strings). Empty means lambda.
FieldGrid radial_solve(const ModelSpec& model, int N, double lambda, const RadialOptions& opts = {},
                       const std::vector<double>& conformal = {}, const FieldGrid* initial = nullptr);

// Linear far-field continuation of a radial profile, v(r) for any r > 0.
double radial_value(const FieldGrid& radial, double r);

struct PlanarOptions {
  double R = 0.0;      // 0: 10 + 5 * diameter of the centers
  int n = 0;           // 0: chosen from h
  double h = 0.1;
  double mu = 1.0;
  double tol = 1e-9;
  int max_newton = 40;
};

FieldGrid planar_solve(const ModelSpec& model, const StringConfiguration& config, const PlanarOptions& opts = {});

// Planar solve with a nodal conformal factor lambda e^eta (empty: lambda) and
// an optional initial iterate on the same grid. Boundary data still come from
// the flat radial profiles.
FieldGrid planar_solve_with_factor(const ModelSpec& model, const StringConfiguration& config, const PlanarOptions& opts,
                                   const std::vector<double>& conformal, const FieldGrid* initial);

struct SandwichResult {
  FieldGrid field;
  FieldGrid lower;           // v-, the solution of the linear-coefficient comparison equation
  double comparison_factor;  // c in Laplacian(v-) = lambda c (e^v - 1)
  int iterations;
  std::vector<double> residual_history;
};

// Monotone iteration between v- and v+ = 0. The ordering v- <= v_k <=
// v_{k+1} <= 0 is asserted on every iterate.
SandwichResult monotone_sandwich_solve(const ModelSpec& model, const StringConfiguration& config,
                                       const PlanarOptions& opts = {}, int max_iter = 2000);

struct CompactResult {
  FieldGrid field;
  double constraint;  // int F12 over the torus
  double target;      // 2 pi N
};

// Source function on the flat torus of side L: Laplacian(v0) = -4 pi N / L^2
// + 4 pi sum mult delta_p. The returned samples are -infinity at a center
// that falls on a node.
std::vector<double> torus_source_function(double L, int n, const StringConfiguration& config);

CompactResult compact_solve(double L, const ModelSpec& model, const StringConfiguration& config, int n = 128,
                            double tol = 1e-10, int max_newton = 60);

// Recompute flux, energy and mass from the field. Radial and disk fields use
// fourth-order differences for grad v, the torus uses spectral derivatives.
SolveDiagnostics diagnostics(const FieldGrid& field, const ModelSpec& model);

// max |Laplacian_h(v) - lambda rhs| over the unknowns (discrete equation).
double discrete_residual(const FieldGrid& field, const ModelSpec& model);

} // namespace curvlab
