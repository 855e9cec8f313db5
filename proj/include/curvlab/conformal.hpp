#pragma once

#include <functional>
#include <vector>

namespace curvlab {

// Doubly periodic samples on [0, L1) x [0, L2), row-major index i*n2 + j.
// Sample counts must be powers of two.
struct TorusField {
  int n1 = 0, n2 = 0;
  double L1 = 0.0, L2 = 0.0;
  std::vector<double> values;

  static TorusField sample(int n1, int n2, double L1, double L2, const std::function<double(double, double)>& f);
  static TorusField constant(int n1, int n2, double L1, double L2, double c);
  double x(int i) const { return L1 * i / n1; }
  double y(int j) const { return L2 * j / n2; }
  double cell_area() const { return L1 * L2 / (static_cast<double>(n1) * n2); }
  double area() const { return L1 * L2; }
  double mean() const;
  void validate(const char* what) const;
};

// Uniform planar grid with spacing h, node (i, j) at (x0 + i h, y0 + j h),
// row-major index i*ny + j.
struct PlanarField {
  int nx = 0, ny = 0;
  double x0 = 0.0, y0 = 0.0, h = 0.0;
  std::vector<double> values;

  static PlanarField sample(int nx, int ny, double x0, double y0, double h,
                            const std::function<double(double, double)>& f);
};

// K = -(1/2) e^{-eta} Laplacian(eta). The planar version uses the 5-point
// stencil and leaves NaN on the outermost ring of nodes.
TorusField gauss_curvature_conformal(const TorusField& eta);
PlanarField gauss_curvature_conformal(const PlanarField& eta);
// Pointwise version for an exponent given as a function, fourth-order
// differences with step h.
double gauss_curvature_conformal(const std::function<double(double, double)>& eta, double x, double y, double h);

struct GaussBonnetConstraint {
  double integral;
  double target;
};
GaussBonnetConstraint gauss_bonnet_constraint(const TorusField& F, const TorusField& eta, int genus);

// I(eta) = int (|grad eta|^2 / 2 - 2 F e^eta) on the flat torus.
double nirenberg_functional(const TorusField& eta, const TorusField& F);

// Right-hand side of the flow, Laplacian(eta) + 2 F e^eta; the negative
// L2 gradient of I.
TorusField flow_velocity(const TorusField& eta, const TorusField& F);

// max |-Laplacian(eta) - 2 F e^eta|, the stationary-equation residual.
double stationary_residual(const TorusField& eta, const TorusField& F);

struct FlowState {
  TorusField eta;
  double time;
  double functional_value;
};

enum class FlowScheme { semi_implicit, explicit_euler };

struct FlowOptions {
  FlowScheme scheme = FlowScheme::semi_implicit;
  double blowup_cap = 50.0;         // max |eta| allowed before the run is declared divergent
  double convergence_tol = 1e-8;    // stop once max|eta_{k+1} - eta_k| / dt drops below this
  int record_every = 1;             // keep every k-th state (the last one is always kept)
  double monotone_slack = 1e-10;
  int max_halvings = 20;
};

struct FlowResult {
  std::vector<FlowState> trajectory;
  int steps_taken;
  int rejected_steps;
  bool converged;
  double terminal_residual;
};

FlowResult heat_flow(const TorusField& F, const TorusField& eta0, double dt, int steps, const FlowOptions& opts = {});

// Equilibrium of the flow reached by shooting on the constant added to eta0.
// A nonzero F makes every equilibrium unstable along the constant direction,
// so the plain flow drifts away; bisection on that constant pins the
// trajectory to the stable manifold.
struct EquilibriumResult {
  FlowResult flow;
  double shift;
  int bisections;
};
EquilibriumResult heat_flow_equilibrium(const TorusField& F, const TorusField& eta0, double dt, int steps,
                                        double shift_lo = -2.0, double shift_hi = 2.0);

struct MeanSplit {
  double c;
  TorusField u;
};
MeanSplit split_mean(const TorusField& eta);

// max-norm residual of -Laplacian(u) + 2 K0 = 4 pi chi F e^u / int F e^u with
// the constant background curvature K0 = 2 pi chi / |S|. For chi = 0 the
// right-hand side is taken as 0.
double mean_field_residual(const TorusField& u, const TorusField& F, int genus);

} // namespace curvlab
