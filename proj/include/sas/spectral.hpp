#pragma once

#include "sas/types.hpp"

#include <span>
#include <vector>

namespace sas {

enum class SpectralWindow { rectangular, kaiser };

struct AnalyticSignalOptions {
  SpectralWindow window = SpectralWindow::kaiser;
  // Sidelobes near -190 dB; leakage stays below double rounding.
  double kaiser_beta = 20.0;
};

/// Forward DFT, X[m] = sum_n x[n] exp(-2 pi i m n / N).
std::vector<Complex> dft(std::span<const Complex> samples);
/// Inverse DFT with 1/N normalization.
std::vector<Complex> idft(std::span<const Complex> spectrum);

std::vector<double> kaiser_window(std::size_t n, double beta);

/// Fraction of spectral energy carried by negative physical frequencies
/// (components exp(+i w t), w > 0). DC and Nyquist bins count half to each side,
/// so a real series gives exactly 1/2.
/// `times`, when given, must be uniformly spaced; at least 64 samples required.
double analytic_signal_residual(std::span<const Complex> samples,
                                std::span<const double> times = {},
                                const AnalyticSignalOptions& options = {});

/// Signed angular frequency of DFT bin m for n samples spaced by dt, in
/// the exp(-i w t) convention (bins above n/2 are positive frequencies).
double bin_frequency(std::size_t m, std::size_t n, double dt);

}  // namespace sas
