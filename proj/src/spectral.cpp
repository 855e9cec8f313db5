#include "curvlab/spectral.hpp"

#include "curvlab/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>

namespace curvlab {

namespace {

// The FFTW planner is not re-entrant; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuf = std::unique_ptr<double, FftwFree>;
using CplxBuf = std::unique_ptr<fftw_complex, FftwFree>;

RealBuf alloc_real(int n) { return RealBuf(fftw_alloc_real(static_cast<size_t>(n))); }
CplxBuf alloc_cplx(int n) { return CplxBuf(fftw_alloc_complex(static_cast<size_t>(n))); }

double wavenumber(int idx, int n, double L) {
  const int k = idx <= n / 2 ? idx : idx - n;
  return 2.0 * std::numbers::pi * k / L;
}

} // namespace

TorusSpectral::TorusSpectral(int n1, int n2, double L1, double L2) : n1_(n1), n2_(n2), L1_(L1), L2_(L2) {
  if (n1 < 2 || n2 < 2 || !(L1 > 0) || !(L2 > 0))
    throw ValidationError("torus grid needs n >= 2 and positive side lengths");
  const int nc = n2 / 2 + 1;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto r = alloc_real(size());
    auto c = alloc_cplx(spectral_size());
    plan_fwd_ = fftw_plan_dft_r2c_2d(n1, n2, r.get(), c.get(), FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft_c2r_2d(n1, n2, c.get(), r.get(), FFTW_ESTIMATE);
  }
  k2_.resize(spectral_size());
  kx_.resize(spectral_size());
  ky_.resize(spectral_size());
  for (int i = 0; i < n1; ++i) {
    const double k1 = wavenumber(i, n1, L1);
    for (int j = 0; j < nc; ++j) {
      const double k2 = wavenumber(j, n2, L2);
      const int idx = i * nc + j;
      k2_[idx] = k1 * k1 + k2 * k2;
      kx_[idx] = (n1 % 2 == 0 && i == n1 / 2) ? 0.0 : k1;
      ky_[idx] = (n2 % 2 == 0 && j == n2 / 2) ? 0.0 : k2;
    }
  }
}

TorusSpectral::~TorusSpectral() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
}

std::vector<std::complex<double>> TorusSpectral::forward(const std::vector<double>& f) const {
  if (static_cast<int>(f.size()) != size()) throw ValidationError("field size does not match torus grid");
  auto r = alloc_real(size());
  auto c = alloc_cplx(spectral_size());
  std::memcpy(r.get(), f.data(), sizeof(double) * f.size());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_fwd_), r.get(), c.get());
  std::vector<std::complex<double>> out(spectral_size());
  for (int k = 0; k < spectral_size(); ++k) out[k] = {c.get()[k][0], c.get()[k][1]};
  return out;
}

std::vector<double> TorusSpectral::inverse(const std::vector<std::complex<double>>& coef) const {
  if (static_cast<int>(coef.size()) != spectral_size()) throw ValidationError("spectrum size does not match torus grid");
  auto r = alloc_real(size());
  auto c = alloc_cplx(spectral_size());
  for (int k = 0; k < spectral_size(); ++k) {
    c.get()[k][0] = coef[k].real();
    c.get()[k][1] = coef[k].imag();
  }
  fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_bwd_), c.get(), r.get());
  const double scale = 1.0 / size();
  std::vector<double> out(size());
  for (int k = 0; k < size(); ++k) out[k] = r.get()[k] * scale;
  return out;
}

std::vector<double> TorusSpectral::apply_symbol(const std::vector<double>& f, const std::vector<double>& symbol) const {
  auto c = forward(f);
  for (int k = 0; k < spectral_size(); ++k) c[k] *= symbol[k];
  return inverse(c);
}

std::vector<double> TorusSpectral::laplacian(const std::vector<double>& f) const {
  auto c = forward(f);
  for (int k = 0; k < spectral_size(); ++k) c[k] *= -k2_[k];
  return inverse(c);
}

std::vector<double> TorusSpectral::dx(const std::vector<double>& f) const {
  auto c = forward(f);
  for (int k = 0; k < spectral_size(); ++k) c[k] *= std::complex<double>(0.0, kx_[k]);
  return inverse(c);
}

std::vector<double> TorusSpectral::dy(const std::vector<double>& f) const {
  auto c = forward(f);
  for (int k = 0; k < spectral_size(); ++k) c[k] *= std::complex<double>(0.0, ky_[k]);
  return inverse(c);
}

double TorusSpectral::dirichlet_integral(const std::vector<double>& f) const {
  // Parseval on the half spectrum: interior columns stand for two
  // conjugate coefficients, columns 0 and n2/2 (even n2) for one.
  const auto c = forward(f);
  const int nc = n2_ / 2 + 1;
  double s = 0.0;
  for (int i = 0; i < n1_; ++i) {
    for (int j = 0; j < nc; ++j) {
      const bool single = (j == 0) || (n2_ % 2 == 0 && j == n2_ / 2);
      const int idx = i * nc + j;
      s += (single ? 1.0 : 2.0) * k2_[idx] * std::norm(c[idx]);
    }
  }
  const double n = static_cast<double>(size());
  return s * L1_ * L2_ / (n * n);
}

PeriodicInterpolant::PeriodicInterpolant(const std::vector<double>& samples) : m_(static_cast<int>(samples.size())) {
  if (m_ < 4) throw ValidationError("periodic interpolation needs at least 4 samples");
  const int nc = m_ / 2 + 1;
  auto r = alloc_real(m_);
  auto c = alloc_cplx(nc);
  std::memcpy(r.get(), samples.data(), sizeof(double) * samples.size());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(m_, r.get(), c.get(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  coef_.resize(nc);
  for (int k = 0; k < nc; ++k) coef_[k] = {c.get()[k][0] / m_, c.get()[k][1] / m_};
}

double PeriodicInterpolant::eval(double t, int order) const {
  // f(t) = c0 + sum_k 2 Re(c_k e^{ikt}), the Nyquist term entering once as a cosine.
  double s = order == 0 ? coef_[0].real() : 0.0;
  const int nc = static_cast<int>(coef_.size());
  for (int k = 1; k < nc; ++k) {
    const bool nyquist = (m_ % 2 == 0 && k == m_ / 2);
    const std::complex<double> ik(0.0, static_cast<double>(k));
    std::complex<double> term = coef_[k] * std::exp(ik * t);
    for (int d = 0; d < order; ++d) term *= ik;
    s += nyquist ? (order == 0 ? coef_[k].real() * std::cos(k * t)
                               : (coef_[k].real() * std::pow(k, order) *
                                  std::cos(k * t + order * std::numbers::pi / 2)))
                 : 2.0 * term.real();
  }
  return s;
}

} // namespace curvlab
