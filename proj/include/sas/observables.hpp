#pragma once

// Experiment-facing scans over the pair amplitude: delay line, polarization
// analysis, angular coincidence maps, pair spectrum and event sampling.

#include "sas/pair_amplitude.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sas {

/// Which scattered frequency an arm accepts.
enum class Channel { any, anti_stokes, stokes };

struct Arm {
  Vector3 direction = Vector3::UnitZ();
  double distance = 1e5;  // [um]
  double delay = 0.0;     // delay line [ps]
  Channel channel = Channel::any;

  DetectorDirection detector(double extra_delay = 0.0) const {
    return DetectorDirection::make(direction, distance, delay + extra_delay);
  }
};

/// Inclusive linear grid; count == 1 yields {start}.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  std::size_t count = 1;

  std::vector<double> values() const;
  /// Requires count >= 1, finite ends, stop >= start, and stop > start when count > 1.
  void validate(const std::string& what) const;
};

/// Everything a scan needs about the medium and the lasers.
struct ScatteringSetup {
  MediumSpec medium;
  LaserPair laser;
  PairConstants constants;
  double sigma_acc = 0.01;

  static ScatteringSetup make(const MediumSpec& medium, const LaserPair& laser, double V_Q,
                              double sigma_acc);
};

struct ArmSetting {
  Vector3 direction = Vector3::UnitZ();
  double x = 0.0;  // transverse offsets used to build `direction`
  double y = 0.0;
  double delay = 0.0;
  double analyzer_angle = 0.0;
};

struct CoincidenceRecord {
  ArmSetting arm1;
  ArmSetting arm2;
  double delta_t = 0.0;
  double rate = 0.0;  // raw / scan maximum
  double raw = 0.0;   // |amplitude|^2
};

/// Amplitude block accepted by the two arms' channels.
Tensor3 channel_block(const PairAmplitude& amplitude, Channel arm1, Channel arm2);

/// |a1^T B a2|^2 with real analyzer axes, or the Frobenius norm squared when
/// no analyzers are given (polarization-blind detectors).
double coincidence_rate(const Tensor3& block, const Vector3* analyzer1 = nullptr,
                        const Vector3* analyzer2 = nullptr);

/// Lab time at which both detectors are 10/gamma past their arrival delay.
double stationary_time(const DetectorDirection& d1, const DetectorDirection& d2,
                       const ScatteringSetup& setup);

/// Direction normalize(center + x u + y v) on the deterministic transverse
/// frame (u, v) of `center`.
Vector3 offset_direction(const Vector3& center, double x, double y);

/// Analyzer axis cos(angle) par + sin(angle) r x par, where par is the
/// normalized projection of `reference` onto the plane transverse to `arm`.
/// Throws GeometryError when the projection vanishes.
Vector3 analyzer_axis(const Vector3& reference, const Vector3& arm, double angle);

// --- delay line --------------------------------------------------------------

struct DelayScanConfig {
  Arm arm1{Vector3::UnitZ(), 1e5, 0.0, Channel::anti_stokes};
  Arm arm2{Vector3::UnitZ(), 1e5, 0.0, Channel::stokes};
  Range delay{0.0, 0.0, 1};  // extra delay on arm 2 [ps]
};

struct DelayScan {
  std::vector<CoincidenceRecord> records;
  double gamma_fit = 0.0;  // -slope of log(rate) against delta_t
  double intercept = 0.0;
  double residual = 0.0;
};

/// Throws UnderflowError when gamma * delta_t exceeds 600 anywhere on the grid.
DelayScan delay_scan(const DelayScanConfig& config, const ScatteringSetup& setup, unsigned threads = 1);

// --- polarization ------------------------------------------------------------

struct PolarizationScanConfig {
  Arm arm1;
  Arm arm2;
  std::optional<Vector3> reference;  // defaults to Re(mode1 polarization)
  double angle1 = 0.0;
  Range angle2{0.0, units::pi, 37};
};

struct PolarizationScan {
  std::vector<CoincidenceRecord> records;
  double parallel_raw = 0.0;  // both analyzers at angle 0
  double crossed_raw = 0.0;   // arm 1 at 0, arm 2 at pi/2
  double crossed_over_parallel = 0.0;
};

PolarizationScan polarization_scan(const PolarizationScanConfig& config, const ScatteringSetup& setup,
                                   unsigned threads = 1);

// --- angular map -------------------------------------------------------------

struct AngularMapConfig {
  std::string id = "angular";
  Arm arm1;
  Arm arm2;
  Range x1, y1, x2, y2;  // offsets around each arm direction
  std::size_t samples = 1;
  std::uint64_t seed = 0;
};

struct AngularMap {
  std::vector<CoincidenceRecord> records;  // arm-1 cell outer, arm-2 cell inner
  std::size_t cells1 = 0;
  std::size_t cells2 = 0;
  double width1_x = 0.0, width1_y = 0.0;  // RMS widths of the arm-1 marginal
  double width2_x = 0.0, width2_y = 0.0;  // RMS widths of the arm-2 marginal
  double expected_width = 0.0;            // sqrt(2 beam_spread^2 + sigma_acc^2 / 2)
};

/// Each cell averages |amplitude|^2 over `samples` laser-direction pairs from
/// the focused-beam distribution; all cells share the same samples.
AngularMap angular_map(const AngularMapConfig& config, const ScatteringSetup& setup, unsigned threads = 1);

/// The laser pair with both directions perturbed by normal offsets scaled by
/// beam_spread; polarizations are re-projected and normalized.
LaserPair perturbed_lasers(const LaserPair& laser, double n1x, double n1y, double n2x, double n2y,
                           double phase_speed);

// --- spectrum ----------------------------------------------------------------

struct PairSpectrum {
  std::vector<double> omega;
  std::vector<double> density;  // 1/((omega - omega_tilde)^2 + gamma^2/4)
  double step = 0.0;
  double peak_omega = 0.0;
  double peak_density = 0.0;
  double fwhm = 0.0;
  double integral = 0.0;  // trapezoid over the grid
};

/// Grid of `points` samples spaced step_over_gamma * gamma with omega_tilde at index points/2.
Range centered_grid(const MediumSpec& medium, std::size_t points, double step_over_gamma);

/// Throws ResolutionError for step > gamma/4 and DomainError unless the grid
/// covers omega_tilde +- 5 gamma.
PairSpectrum pair_spectrum(const MediumSpec& medium, const Range& omega);

struct DelayTransform {
  std::vector<double> delta;
  std::vector<double> modulus;  // |sum rho e^{-i omega delta} d omega| / (2 pi / gamma)
  std::vector<double> model;    // exp(-gamma |delta| / 2)
  double max_error = 0.0;
};

/// Discrete Fourier transform of the spectrum, reported on `points` bins
/// evenly chosen in [0, max_delay].
DelayTransform spectrum_delay_transform(const PairSpectrum& spectrum, const MediumSpec& medium,
                                        double max_delay, std::size_t points);

// --- events ------------------------------------------------------------------

struct CoincidenceEvent {
  std::size_t cell = 0;
  double timestamp = 0.0;  // [ps]
};

/// Inverse-transform sampling over a discrete rate map with exponential
/// inter-arrival times at `event_rate` events per ps.
std::vector<CoincidenceEvent> sample_events(std::span<const double> rates, std::uint64_t seed,
                                            std::size_t n_events, double event_rate = 1e-6,
                                            const std::string& stream = "events");

// --- CSV ---------------------------------------------------------------------

void write_csv(std::ostream& out, const DelayScan& scan);
void write_csv(std::ostream& out, const PolarizationScan& scan);
void write_csv(std::ostream& out, const AngularMap& map);
void write_csv(std::ostream& out, const PairSpectrum& spectrum);
void write_csv(std::ostream& out, const DelayTransform& transform);
void write_csv(std::ostream& out, const std::vector<CoincidenceEvent>& events, const AngularMap& map);

}  // namespace sas
