#pragma once

#include <complex>
#include <vector>

namespace curvlab {

// FFT-based operators on a doubly periodic n1 x n2 grid of the rectangle
// [0,L1) x [0,L2). Samples are row-major, index i*n2 + j with i along side 1.
// Instances are immutable after construction; every method is safe to call
// from several threads.
class TorusSpectral {
public:
  TorusSpectral(int n1, int n2, double L1, double L2);
  ~TorusSpectral();
  TorusSpectral(const TorusSpectral&) = delete;
  TorusSpectral& operator=(const TorusSpectral&) = delete;

  int n1() const { return n1_; }
  int n2() const { return n2_; }
  int size() const { return n1_ * n2_; }
  int spectral_size() const { return n1_ * (n2_ / 2 + 1); }

  std::vector<std::complex<double>> forward(const std::vector<double>& f) const;
  std::vector<double> inverse(const std::vector<std::complex<double>>& c) const;

  // |k|^2 for every half-spectrum coefficient (Nyquist modes included).
  const std::vector<double>& k_squared() const { return k2_; }
  // Wave numbers; the Nyquist entry is zeroed in these (first derivatives).
  const std::vector<double>& kx() const { return kx_; }
  const std::vector<double>& ky() const { return ky_; }

  std::vector<double> laplacian(const std::vector<double>& f) const;
  std::vector<double> dx(const std::vector<double>& f) const;
  std::vector<double> dy(const std::vector<double>& f) const;
  // Multiply the half spectrum by a real symbol, then transform back.
  std::vector<double> apply_symbol(const std::vector<double>& f, const std::vector<double>& symbol) const;
  // Integral of |grad f|^2 over the torus, computed from the spectrum.
  double dirichlet_integral(const std::vector<double>& f) const;

private:
  int n1_, n2_;
  double L1_, L2_;
  void* plan_fwd_ = nullptr;
  void* plan_bwd_ = nullptr;
  std::vector<double> k2_, kx_, ky_;
};

// Trigonometric interpolant of equispaced samples of a 2*pi-periodic function.
class PeriodicInterpolant {
public:
  explicit PeriodicInterpolant(const std::vector<double>& samples);
  double value(double t) const { return eval(t, 0); }
  double derivative(double t, int order) const { return eval(t, order); }

private:
  double eval(double t, int order) const;
  int m_;
  std::vector<std::complex<double>> coef_;
};

} // namespace curvlab
