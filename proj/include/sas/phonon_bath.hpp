#pragma once

// Damped molecular oscillator: the medium description, a discretized flat
// reservoir, the Weisskopf-Wigner closed forms, and an exact one-quantum
// oracle for the oscillator + reservoir Hamiltonian.

#include "sas/types.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace sas {

struct MediumSpec {
  double n = 1.0;            // refractive index
  double N = 1.0;            // molecular number density [um^-3]
  double alpha_prime = 1.0;  // polarizability derivative (model units)
  double M = 1.0;            // total oscillator mass (model units)
  double omega0 = 1.0;       // bare resonance [rad/ps]
  double omega_tilde = 1.0;  // observed resonance [rad/ps]
  double gamma = 0.01;       // decay constant [rad/ps]
  double V_S = 1.0;          // scattering volume [um^3]
  double T = 300.0;          // temperature [K]

  double phase_speed() const { return units::c / n; }

  /// Throws DomainError on hard violations (n < 1, gamma <= 0, non-positive
  /// resonance); returns soft warnings (gamma/omega_tilde >= 0.1, omega_tilde
  /// far from omega0).
  std::vector<std::string> validate() const;
};

/// Uniform reservoir grid centred on omega_tilde with constant coupling.
struct ReservoirGrid {
  std::vector<double> omegas;
  std::vector<Complex> couplings;
  double density = 0.0;    // modes per rad/ps
  double bandwidth = 0.0;  // full width [rad/ps]
  double center = 0.0;

  std::size_t count() const { return omegas.size(); }
  double spacing() const { return bandwidth / static_cast<double>(omegas.size()); }
  /// 2 pi / spacing: the discrete bath revives after this time.
  double recurrence_time() const { return 2.0 * units::pi / spacing(); }
  double validity_window() const { return 0.5 * recurrence_time(); }
};

/// Needs J odd and >= 101; bandwidth below 10 gamma throws UnderResolvedBath
/// (20 gamma or more is recommended). Coupling fixed by
/// |zeta|^2 nu = gamma / (2 pi) with nu = J / bandwidth.
ReservoirGrid discretize_reservoir(const MediumSpec& spec, std::size_t J, double bandwidth);

/// exp(-i (omega_tilde - i gamma/2) t), t >= 0.
Complex ww_amplitude(double t, const MediumSpec& spec);

/// Coefficient of c_j in the Langevin operator at time t.
Complex langevin_kernel(std::size_t j, double t, const ReservoirGrid& grid, const MediumSpec& spec);

/// |exp(-gamma t) + sum_j |L_j(t)|^2 - 1| for t in [0, validity_window].
double commutator_defect(double t, const ReservoirGrid& grid, const MediumSpec& spec);

/// Hermitian Hamiltonian of the one-quantum sector, basis {molecule, bath_0..J-1}.
/// Arrowhead structure: diagonal (omega_tilde, omega_j), molecule row zeta_j,
/// molecule column conj(zeta_j).
class FockOracle {
 public:
  enum class Method { arrowhead, dense };

  FockOracle(const ReservoirGrid& grid, const MediumSpec& spec);

  std::size_t dimension() const { return diagonal_.size(); }
  const Eigen::VectorXd& diagonal() const { return diagonal_; }
  const Eigen::VectorXcd& coupling() const { return coupling_; }
  Eigen::MatrixXcd dense_hamiltonian() const;

  /// Eigenvalues ascending, eigenvectors column-wise (dense) for either
  /// method. Dense output is limited to dimension <= 4000.
  struct Eigensystem {
    Eigen::VectorXd values;
    Eigen::MatrixXcd vectors;
  };
  Eigensystem eigensystem(Method method = Method::arrowhead) const;

  /// Roots of the secular equation lambda - omega_tilde = sum |zeta_j|^2/(lambda - omega_j).
  Eigen::VectorXd arrowhead_eigenvalues() const;

  /// Creation vectors of the one-quantum sector acting on the joint vacuum.
  Eigen::VectorXcd molecule_state() const;
  Eigen::VectorXcd bath_state(std::size_t j) const;

 private:
  Eigen::VectorXd diagonal_;
  Eigen::VectorXcd coupling_;
};

struct Excitation {
  enum class Kind { molecule, bath_mode } kind = Kind::molecule;
  std::size_t mode = 0;

  static Excitation molecule() { return {}; }
  static Excitation bath(std::size_t j) { return {Kind::bath_mode, j}; }
};

struct DecaySeries {
  std::vector<double> times;
  std::vector<double> survival;  // molecule population |<mol|psi(t)>|^2
  std::vector<double> model;     // exp(-gamma t)
  double max_norm_error = 0.0;
};

/// Exact evolution of one quantum on [0, t_max] with `steps` intervals.
DecaySeries oracle_decay(const ReservoirGrid& grid, const MediumSpec& spec, double t_max,
                         std::size_t steps, Excitation initial = Excitation::molecule(),
                         FockOracle::Method method = FockOracle::Method::arrowhead);

struct DecayFit {
  double gamma = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the log-linear fit
  std::size_t points = 0;
};

/// Least-squares slope of -log(survival) over samples with t in [t_lo, t_hi].
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& survival,
                        double t_lo, double t_hi);

/// Bose occupation 1/(exp(hbar omega / k_B T) - 1).
double thermal_phonon_number(double omega_tilde, double T);

void write_csv(std::ostream& out, const DecaySeries& series);
void write_csv(std::ostream& out, const ReservoirGrid& grid);

}  // namespace sas
