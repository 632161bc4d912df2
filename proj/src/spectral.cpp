#include "sas/spectral.hpp"

#include "sas/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>

namespace sas {

std::vector<Complex> dft(std::span<const Complex> samples) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(samples.begin(), samples.end());
  std::vector<Complex> out;
  fft.fwd(out, in);
  return out;
}

std::vector<Complex> idft(std::span<const Complex> spectrum) {
  Eigen::FFT<double> fft;
  std::vector<Complex> in(spectrum.begin(), spectrum.end());
  std::vector<Complex> out;
  fft.inv(out, in);
  return out;
}

std::vector<double> kaiser_window(std::size_t n, double beta) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  const double norm = std::cyl_bessel_i(0.0, beta);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = 2.0 * static_cast<double>(i) / static_cast<double>(n - 1) - 1.0;
    w[i] = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - x * x))) / norm;
  }
  return w;
}

double analytic_signal_residual(std::span<const Complex> samples, std::span<const double> times,
                                const AnalyticSignalOptions& options) {
  const std::size_t n = samples.size();
  if (n < 64) throw SamplingError("analytic_signal_residual: need at least 64 samples");
  if (!times.empty()) {
    if (times.size() != n) throw SamplingError("analytic_signal_residual: times/samples size mismatch");
    const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
    if (!(dt > 0)) throw SamplingError("analytic_signal_residual: times must increase");
    for (std::size_t i = 1; i < n; ++i) {
      if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * dt) {
        throw SamplingError("analytic_signal_residual: non-uniform sampling");
      }
    }
  }
  std::vector<Complex> x(samples.begin(), samples.end());
  if (options.window == SpectralWindow::kaiser) {
    const auto w = kaiser_window(n, options.kaiser_beta);
    for (std::size_t i = 0; i < n; ++i) x[i] *= w[i];
  }
  const auto spectrum = dft(x);
  double total = 0.0;
  double negative = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const double e = std::norm(spectrum[m]);
    total += e;
    if (m == 0 || (n % 2 == 0 && m == n / 2)) {
      negative += 0.5 * e;
    } else if (m < (n + 1) / 2) {
      // exp(-2 pi i m n/N) analyses exp(+i w t): negative physical frequency.
      negative += e;
    }
  }
  if (total == 0.0) return 0.0;
  return negative / total;
}

double bin_frequency(std::size_t m, std::size_t n, double dt) {
  const double mm = m <= n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
  // DFT bin m measures exp(+i 2 pi m t/T); the physical frequency is its negative.
  return -2.0 * units::pi * mm / (static_cast<double>(n) * dt);
}

}  // namespace sas
