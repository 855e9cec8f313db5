#pragma once

#include "curvlab/vortex_solvers.hpp"

#include <vector>

namespace curvlab {

// eta at every node of the field, with e^eta = lambda (e^{tau v - P(e^v)}
// prod |x - p_s|^{-2 tau})^{4 pi G}, P the model's metric potential. The
// source logs of v cancel against the product, so eta is finite everywhere.
std::vector<double> metric_factor_from_v(const FieldGrid& v, const ModelSpec& model, const StringConfiguration& config,
                                         double G, double lambda);

struct GravitatingOptions {
  RadialOptions radial;
  PlanarOptions planar;
  double tol = 1e-7;  // max |v_{j+1} - v_j| between outer iterations
  int max_outer = 60;
};

struct GravitatingSolution {
  FieldGrid field;  // conformal = lambda e^eta of the converged iterate
  std::vector<double> eta;
  double G = 0.0;
  double lambda = 1.0;
  double tau = 1.0;
  double deficit = 0.0;          // 8 pi^2 tau N G
  double total_curvature = 0.0;  // quadrature of K e^eta, tail included
  double curvature_tail = 0.0;   // estimate of the part beyond the mesh
  double energy = 0.0;           // quadrature of e^eta H
  double bps_energy = 0.0;       // pi tau N
  double threshold = 0.0;        // 1 / (4 pi tau G)
  bool complete = true;
  int outer_iterations = 0;
  std::vector<double> history;   // max |v_{j+1} - v_j| per outer step
  // max |K e^eta - 8 pi G e^eta H| over the mesh, K from differences of eta.
  double reduction_defect = 0.0;
  // max |2 e^eta H - Laplacian(P(e^v) / 2) + (tau/2) Laplacian(v)| away from the center.
  double total_laplacian_defect = 0.0;
};

// Outer Picard iteration on eta with the flat Newton solver inside. Radial
// when all centers coincide, disk otherwise.
GravitatingSolution gravitating_solve(const ModelSpec& model, const StringConfiguration& config, double G,
                                      const GravitatingOptions& opts = {});

struct StringReport {
  double deficit;
  double energy;
  double total_curvature;
  bool complete;
  double threshold;
};
StringReport string_report(const GravitatingSolution& sol);

} // namespace curvlab
