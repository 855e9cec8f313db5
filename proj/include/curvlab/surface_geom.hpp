#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace curvlab {

enum class SurfaceKind { sphere, ring_torus, revolution };
enum class Orientation { inward, outward };

// Profile of a surface of revolution x = (rho cos v, rho sin v, z) at one u.
struct ProfilePoint {
  double rho, z;
  double rho_u, z_u;
  double rho_uu, z_uu;
};

// A closed surface of revolution on a curvature-line chart (u, v).
//
// sphere:      u = polar angle on midpoint (Fejer) nodes, v periodic.
// ring_torus:  u, v both periodic, x = ((a + b cos u) cos v, ..., b sin u).
// revolution:  closed profile curve given by equispaced samples, traversed
//              counterclockwise in the (rho, z) half plane; u, v periodic.
//
// With the inward orientation the ring torus has k1 = -1/b and the unit
// sphere k1 = k2 = -1. Bending energies only see even powers of the
// curvatures, so they do not depend on this choice.
class ParamSurface {
public:
  static ParamSurface sphere(double R, int n_u = 128, int n_v = 128, Orientation o = Orientation::inward);
  static ParamSurface ring_torus(double a, double b, int n_u = 128, int n_v = 128,
                                 Orientation o = Orientation::inward);
  static ParamSurface revolution(std::vector<double> rho, std::vector<double> z, int n_u = 128, int n_v = 128,
                                 Orientation o = Orientation::inward);

  SurfaceKind kind() const { return kind_; }
  Orientation orientation() const { return orientation_; }
  int n_u() const { return n_u_; }
  int n_v() const { return n_v_; }
  int size() const { return n_u_ * n_v_; }
  int genus() const { return kind_ == SurfaceKind::sphere ? 0 : 1; }
  int euler_characteristic() const { return 2 - 2 * genus(); }
  std::string describe() const;

  double radius() const { return p0_; }     // sphere
  double a() const { return p0_; }          // ring torus
  double b() const { return p1_; }          // ring torus

  double u(int i) const;
  double v(int j) const;
  const ProfilePoint& profile(int i) const { return prof_[i]; }
  // Quadrature weight in u: sum_i w_u(i) g(u_i) J(u_i) approximates the u-integral of g J.
  double u_weight(int i) const { return wu_[i]; }
  double v_weight() const;

  ParamSurface with_grid(int n_u, int n_v) const;

private:
  ParamSurface() = default;
  void build_nodes();

  SurfaceKind kind_ = SurfaceKind::sphere;
  Orientation orientation_ = Orientation::inward;
  int n_u_ = 0, n_v_ = 0;
  double p0_ = 0.0, p1_ = 0.0;
  std::vector<double> prof_rho_, prof_z_;
  std::vector<ProfilePoint> prof_;
  std::vector<double> wu_;
};

// Per-node geometry, row-major index i*n_v + j.
struct CurvatureField {
  int n_u = 0, n_v = 0;
  std::vector<double> u, v;
  std::vector<double> E, F, G;
  std::vector<double> k1, k2, H, K;
  std::vector<double> area_density;  // sqrt(EG - F^2)
  std::vector<double> dA;            // area_density times the quadrature weights
};

CurvatureField curvature_data(const ParamSurface& surface);

double surface_integral(const ParamSurface& surface, const std::vector<double>& integrand);
double surface_area(const ParamSurface& surface);
double enclosed_volume(const ParamSurface& surface);

// Fourth-order finite differences on the (u, v) chart; across the sphere's
// poles the field is continued by the reflection (u, v) -> (-u, v + pi).
std::vector<double> laplace_beltrami(const ParamSurface& surface, const std::vector<double>& field);

struct GaussBonnetReport {
  double total_curvature;
  double expected;
  double defect;
};
GaussBonnetReport gauss_bonnet_check(const ParamSurface& surface);

// Throws unless F vanishes to rounding at every node (curvature-line chart).
void check_curvature_line_chart(const CurvatureField& field, double tol = 1e-10);

// Field sampled from a function of (u, v).
std::vector<double> sample_on_grid(const ParamSurface& surface, const std::function<double(double, double)>& f);

} // namespace curvlab
