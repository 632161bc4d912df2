#pragma once

// Two-photon Stokes/anti-Stokes amplitude: constants, the Lorentzian exchange
// integral, vacuum bookkeeping, equivalent dipoles and the symmetrized
// stationary pair amplitude.

#include "sas/phonon_bath.hpp"
#include "sas/scatter_green.hpp"

#include <iosfwd>
#include <vector>

namespace sas {

/// Two incident laser photons of common frequency.
struct LaserPair {
  PlaneWaveMode mode1;
  PlaneWaveMode mode2;
  double beam_spread = 0.0;  // per-axis angular std. dev. of a focused beam [rad]

  double omega_l() const { return mode1.omega; }
  /// Throws if the modes differ in frequency or carry unnormalized polarizations.
  void validate() const;
};

/// Physical constants in model units; defaults fold them to 1.
struct ModelUnits {
  double hbar = 1.0;
  double eps0 = 1.0;
  double mu0 = 1.0;
};

struct PairConstants {
  Complex C;
  Complex D;
  double dipole_p = 0.0;
  double omega_l = 0.0;
  double omega_a = 0.0;
  double omega_s = 0.0;
  Complex Omega_a;
  Complex Omega_s;
  double gamma = 0.0;
  double phase_speed = units::c;
  double source_extent = 0.0;     // V_S^(1/3)
  double dipole_prefactor = 0.0;  // sqrt(2 eps0) mu0 / (4 pi)
  ModelUnits units;
};

/// C, D and the equivalent dipole p. Requires positive medium constants and
/// V_Q >= V_S.
PairConstants derive_constants(const MediumSpec& medium, const LaserPair& laser, double V_Q,
                               const ModelUnits& units = {});

/// Closed form of the Lorentzian exchange integral with the lower limit taken
/// to -infinity: (2 pi / gamma) exp(i omega_tilde D) exp(-gamma |D| / 2), D = delta_r / u.
Complex lorentzian_exchange(double delta_r, const MediumSpec& medium, double phase_speed);

struct QuadratureValue {
  Complex value;
  double error_estimate = 0.0;
};

/// The same integral evaluated numerically on [0, omega_max] by adaptive
/// Gauss-Kronrod quadrature. An infinite omega_max adds the tail as a
/// one-sided Fourier integral.
QuadratureValue lorentzian_exchange_quadrature(double delta_r, const MediumSpec& medium,
                                               double phase_speed, double omega_max,
                                               double tolerance = 1e-13);

struct VacuumReport {
  double c_identity_deviation = 0.0;  // max |<0|c_j1 c_j2^dag|0> - delta|
  double b_identity_deviation = 0.0;
  double v_norm = 0.0;                // <0|v v^dag|0>
  double v_norm_deviation = 0.0;
  double cross_terms = 0.0;           // max |<0|x_q1 y_q2^dag|0>|, q1 != q2
  double thermal_occupation = 0.0;
  bool vacuum_ok = true;              // thermal_occupation <= 1e-2
};

/// Vacuum expectation identities on the truncated one-quantum space, with
/// two spatial phonon modes q to expose cross terms.
VacuumReport vacuum_matrix_elements(const FockOracle& oracle, const ReservoirGrid& grid,
                                    const MediumSpec& spec);

/// Throws VacuumApproximationError when the thermal phonon number exceeds 1e-2.
void require_vacuum_approximation(const MediumSpec& medium);

/// Far-field wave function of the equivalent dipole oscillating at `omega`.
ComplexVec3 dipole_wavefunction(double omega, const PlaneWaveMode& mode, const DetectorDirection& det,
                                double t, const PairConstants& consts);

enum class Evaluation { stationary, transient };

struct PairAmplitude {
  Tensor3 tensor;             // full symmetrized amplitude, rows: leg at r1, cols: leg at r2
  Tensor3 anti_stokes_first;  // terms with omega_a at r1 and omega_s at r2
  Tensor3 stokes_first;       // terms with omega_s at r1 and omega_a at r2
  DetectorDirection r1;
  DetectorDirection r2;
  double t = 0.0;
  double delta_t = 0.0;  // |arrival delay 1 - arrival delay 2|
  double decay = 1.0;    // exp(-gamma delta_t / 2) (+ transient term)
  double weight = 1.0;   // momentum acceptance
};

/// exp(-gamma delta_t / 2) S'[Psi_a(r1) Psi_s(r2)] times the momentum weight.
/// S' is the unnormalized sum over the r1<->r2 and mode1<->mode2 swaps.
PairAmplitude two_photon_amplitude(const LaserPair& laser, const DetectorDirection& r1,
                                   const DetectorDirection& r2, double t,
                                   const PairConstants& consts, double sigma_acc,
                                   Evaluation evaluation = Evaluation::stationary);

/// Writes one CSV row per amplitude: detector angles, delta_t, Re/Im of the
/// 9 tensor entries (row-major).
void write_csv(std::ostream& out, const std::vector<PairAmplitude>& amplitudes);

}  // namespace sas
