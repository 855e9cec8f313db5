#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace curvlab {

using cplx = std::complex<double>;

struct Point2 {
  double x = 0.0, y = 0.0;
};

// Dirac-source strings with strengths sigma_s at p_s.
struct StringDistribution {
  std::vector<Point2> points;
  std::vector<double> strengths;
  double G = 0.0;
  double lambda = 1.0;

  double total_strength() const;
  void validate() const;
};

// u(z) = c prod (z - q_s) / prod (z - p_s), poles p (N of them), zeros q (M), N > M.
struct RationalMap {
  cplx c{1.0, 0.0};
  std::vector<cplx> poles;
  std::vector<cplx> zeros;

  int N() const { return static_cast<int>(poles.size()); }
  int M() const { return static_cast<int>(zeros.size()); }
  void validate() const;
};

// Conformal factor e^eta of a planar metric, given through eta.
struct ConformalFactor {
  std::function<double(double, double)> eta;
  double alpha = 0.0;            // e^eta = O(r^-alpha)
  double curvature_decay = 0.0;  // K e^eta = O(r^-curvature_decay); 0 when not applicable
  double feature_radius = 1.0;   // all sources lie within this radius
  std::vector<Point2> singular_points;
  std::string source;

  // e^eta; +infinity at a singular point.
  double value(double x, double y) const;
};

ConformalFactor letelier_factor(const StringDistribution& dist);

// Asymptotic change of variables for the Dirac-source metric.
struct ConicalReport {
  double total_strength;
  double radial_exponent;  // rho ~ r^(1 - 4 G sigma)
  double angle_range;      // 2 pi (1 - 4 G sigma)
  double deficit;          // 8 pi G sigma
};
ConicalReport letelier_conical_report(const StringDistribution& dist);

struct MapValue {
  cplx u;
  cplx du_dx1;
  cplx du_dx2;
  bool at_infinity = false;
};
MapValue rational_map_eval(const RationalMap& map, cplx z);

// Residual of the second-order sigma-model equation at z, with the
// divergence taken by fourth-order differences of step h.
cplx sigma_model_residual(const RationalMap& map, cplx z, double h = 1e-3);

// 2 |grad u|^2 / (1 + |u|^2)^2, finite at the poles.
double sigma_energy_density(const RationalMap& map, cplx z);

struct SigmaReport {
  double energy;           // integral over |z| < R
  double tail_estimate;    // analytic estimate of the energy outside |z| = R
  double degree_integral;  // outer circle minus pole circles
  int N_detected;
  double R;
};
SigmaReport sigma_energy_and_degree(const RationalMap& map, double R, double excision = 1e-3,
                                    double tail_rtol = 1e-4);

// e^eta = lambda (prod |x - p_s|^2 + |c|^2 prod |x - q_s|^2)^(-16 pi G).
ConformalFactor cg_string_metric(const RationalMap& map, double G, double lambda);

struct CurvatureReport {
  double total_curvature;
  double deficit;
  double defect;
  double truncation_radius;
  double tail_estimate;
};
CurvatureReport curvature_deficit_report(const ConformalFactor& factor, int N, double G, double rtol = 1e-4);

enum class CompletenessMode { harmonic_map, lohe };

struct CompletenessReport {
  bool complete;
  bool boundary;        // exponent equal to 1 within 1e-12 relative: logarithmic divergence, flagged
  double threshold;     // largest N for which the metric is complete
  double exponent;      // e^(eta/2) ~ (1 + r)^-exponent
  double radial_length; // +infinity when divergent
};
CompletenessReport completeness_check(int N, double G, CompletenessMode mode, double tau = 1.0);

// int_0^R (1 + r)^-s dr by quadrature in t = ln(1 + r).
double radial_length_partial(double s, double R);

} // namespace curvlab
