#include "sas/pair_amplitude.hpp"

#include "sas/csv.hpp"
#include "sas/errors.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/ooura_fourier_integrals.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sas {

void LaserPair::validate() const {
  if (!(mode1.omega > 0.0)) throw DomainError("laser: omega_l must be > 0");
  if (std::abs(mode1.omega - mode2.omega) > 1e-12 * mode1.omega) {
    throw DomainError("laser: both photons must share omega_l");
  }
  for (const auto* m : {&mode1, &mode2}) {
    if (std::abs(m->polarization.norm() - 1.0) > unit_tolerance<double>()) {
      throw NormalizationError("laser: polarization is not normalized");
    }
    if (std::abs(dot(Vector3(m->direction()), m->polarization)) > 1e-10) {
      throw GeometryError("laser: polarization is not transverse to k");
    }
  }
  if (!(beam_spread >= 0.0)) throw DomainError("laser: beam_spread must be >= 0");
}

PairConstants derive_constants(const MediumSpec& medium, const LaserPair& laser, double V_Q,
                               const ModelUnits& units) {
  if (medium.M == 0.0 || medium.omega_tilde == 0.0 || laser.omega_l() == 0.0 || medium.n == 0.0) {
    throw SingularConstant("derive_constants: zero mass, frequency or index");
  }
  for (double v : {medium.N, medium.alpha_prime, medium.M, medium.omega_tilde, medium.V_S, medium.gamma,
                   laser.omega_l(), units.hbar, units.eps0, units.mu0}) {
    if (!(v > 0.0)) throw DomainError("derive_constants: medium and laser constants must be positive");
  }
  if (!(V_Q >= medium.V_S)) throw DomainError("derive_constants: V_Q must be >= V_S");

  PairConstants k;
  k.units = units;
  k.omega_l = laser.omega_l();
  k.gamma = medium.gamma;
  k.phase_speed = medium.phase_speed();
  k.source_extent = std::cbrt(medium.V_S);
  k.C = Complex(0.0, medium.N * medium.alpha_prime * units.mu0 * units.eps0 * units.hbar /
                         (2.0 * medium.n * std::sqrt(2.0 * medium.M * medium.omega_tilde * V_Q)));
  k.D = k.C * medium.V_S / (2.0 * units::pi);
  k.dipole_p = units.hbar * medium.N * medium.V_S * medium.alpha_prime / (2.0 * medium.n) *
               std::sqrt(units.eps0 * k.omega_l / (medium.M * medium.omega_tilde * V_Q));
  k.omega_a = k.omega_l + medium.omega_tilde;
  k.omega_s = k.omega_l - medium.omega_tilde;
  k.Omega_a = Complex(k.omega_a, -0.5 * medium.gamma);
  k.Omega_s = Complex(k.omega_s, -0.5 * medium.gamma);
  k.dipole_prefactor = std::sqrt(2.0 * units.eps0) * units.mu0 / (4.0 * units::pi);
  return k;
}

Complex lorentzian_exchange(double delta_r, const MediumSpec& medium, double phase_speed) {
  if (!(medium.gamma > 0.0)) throw DomainError("lorentzian_exchange: gamma must be > 0");
  const double d = delta_r / phase_speed;
  return (2.0 * units::pi / medium.gamma) * std::exp(Complex(-0.5 * medium.gamma * std::abs(d),
                                                             medium.omega_tilde * d));
}

QuadratureValue lorentzian_exchange_quadrature(double delta_r, const MediumSpec& medium,
                                               double phase_speed, double omega_max,
                                               double tolerance) {
  if (!(medium.gamma > 0.0)) throw DomainError("lorentzian_exchange_quadrature: gamma must be > 0");
  if (!(omega_max > 0.0)) throw DomainError("lorentzian_exchange_quadrature: omega_max must be > 0");
  using boost::math::quadrature::gauss_kronrod;
  const double d = delta_r / phase_speed;
  const double w0 = medium.omega_tilde;
  const double hw2 = 0.25 * medium.gamma * medium.gamma;
  auto lorentz = [&](double w) { return 1.0 / ((w - w0) * (w - w0) + hw2); };
  auto re = [&](double w) { return std::cos(w * d) * lorentz(w); };
  auto im = [&](double w) { return std::sin(w * d) * lorentz(w); };

  // Finite part on panels no wider than gamma (or half an oscillation) with a
  // break at the peak; an infinite upper limit is split at omega_tilde + 50 gamma.
  const bool infinite = std::isinf(omega_max);
  const double cut = infinite ? std::max(w0, 0.0) + 50.0 * medium.gamma : omega_max;
  double panel = medium.gamma;
  if (d != 0.0) panel = std::min(panel, units::pi / std::abs(d));
  std::vector<double> edges{0.0};
  auto add_range = [&](double a, double b) {
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / panel));
    for (std::size_t i = 1; i <= n; ++i) {
      edges.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n));
    }
  };
  if (w0 > 0.0 && w0 < cut) {
    add_range(0.0, w0);
    add_range(w0, cut);
  } else {
    add_range(0.0, cut);
  }

  QuadratureValue out;
  for (std::size_t i = 1; i < edges.size(); ++i) {
    double err_re = 0.0, err_im = 0.0;
    const double vr = gauss_kronrod<double, 31>::integrate(re, edges[i - 1], edges[i], 10, tolerance, &err_re);
    const double vi = gauss_kronrod<double, 31>::integrate(im, edges[i - 1], edges[i], 10, tolerance, &err_im);
    out.value += Complex(vr, vi);
    out.error_estimate += std::hypot(err_re, err_im);
  }
  if (!infinite) return out;

  // Tail [cut, inf): e^{i cut d} times a one-sided Fourier integral in s = omega - cut.
  auto shifted = [&](double s) { return lorentz(cut + s); };
  if (d == 0.0) {
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    const double v = integrator.integrate(shifted, 0.0, std::numeric_limits<double>::infinity(), tolerance, &err);
    out.value += v;
    out.error_estimate += err;
    return out;
  }
  const double freq = std::abs(d);
  boost::math::quadrature::ooura_fourier_cos<double> cos_integrator(std::max(tolerance, 1e-14));
  boost::math::quadrature::ooura_fourier_sin<double> sin_integrator(std::max(tolerance, 1e-14));
  const auto [c, c_err] = cos_integrator.integrate(shifted, freq);
  const auto [s, s_err] = sin_integrator.integrate(shifted, freq);
  const Complex tail = std::exp(Complex(0.0, cut * d)) * Complex(c, d > 0.0 ? s : -s);
  out.value += tail;
  out.error_estimate += std::hypot(c_err * std::abs(c), s_err * std::abs(s));
  return out;
}

VacuumReport vacuum_matrix_elements(const FockOracle& oracle, const ReservoirGrid& grid,
                                    const MediumSpec& spec) {
  const auto dim = static_cast<Eigen::Index>(oracle.dimension());
  const auto J = static_cast<Eigen::Index>(grid.count());
  if (dim != J + 1) throw DomainError("vacuum_matrix_elements: oracle does not match grid");

  // One-quantum space of two phonon modes q = 0, 1: [mol_0, bath_0..., mol_1, bath_1...].
  auto embed = [&](const Eigen::VectorXcd& v, int q) {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(2 * dim);
    out.segment(q * dim, dim) = v;
    return out;
  };
  auto v_dagger = [&](int q) {
    Eigen::VectorXcd s = Eigen::VectorXcd::Zero(dim);
    for (Eigen::Index j = 0; j < J; ++j) {
      const auto ju = static_cast<std::size_t>(j);
      s += std::conj(grid.couplings[ju]) / Complex(grid.omegas[ju] - spec.omega_tilde, -0.5 * spec.gamma) *
           oracle.bath_state(ju);
    }
    return embed(s, q);
  };

  VacuumReport r;
  Eigen::MatrixXcd c0(2 * dim, J), c1(2 * dim, J);
  for (Eigen::Index j = 0; j < J; ++j) {
    c0.col(j) = embed(oracle.bath_state(static_cast<std::size_t>(j)), 0);
    c1.col(j) = embed(oracle.bath_state(static_cast<std::size_t>(j)), 1);
  }
  r.c_identity_deviation = (c0.adjoint() * c0 - Eigen::MatrixXcd::Identity(J, J)).cwiseAbs().maxCoeff();
  const Eigen::VectorXcd b0 = embed(oracle.molecule_state(), 0);
  const Eigen::VectorXcd b1 = embed(oracle.molecule_state(), 1);
  r.b_identity_deviation = std::abs(b0.dot(b0) - 1.0);
  const Eigen::VectorXcd v0 = v_dagger(0);
  const Eigen::VectorXcd v1 = v_dagger(1);
  r.v_norm = v0.dot(v0).real();
  r.v_norm_deviation = std::abs(r.v_norm - 1.0);
  r.cross_terms = std::max({(c0.adjoint() * c1).cwiseAbs().maxCoeff(), std::abs(b0.dot(b1)),
                            std::abs(v0.dot(v1))});
  r.thermal_occupation = thermal_phonon_number(spec.omega_tilde, spec.T);
  r.vacuum_ok = r.thermal_occupation <= 1e-2;
  return r;
}

void require_vacuum_approximation(const MediumSpec& medium) {
  const double occupation = thermal_phonon_number(medium.omega_tilde, medium.T);
  if (occupation > 1e-2) {
    throw VacuumApproximationError("thermal phonon number " + std::to_string(occupation) +
                                   " exceeds 1e-2; the vibrational vacuum approximation does not hold");
  }
}

ComplexVec3 dipole_wavefunction(double omega, const PlaneWaveMode& mode, const DetectorDirection& det,
                                double t, const PairConstants& consts) {
  if (!det.far_field(consts.source_extent)) {
    throw FarFieldViolation("dipole_wavefunction: detector closer than 100 source sizes");
  }
  const auto amp = scattered_mode_amplitude(mode, Complex(omega, 0.0), det, t, consts.phase_speed);
  return consts.dipole_prefactor * consts.dipole_p * amp.value;
}

PairAmplitude two_photon_amplitude(const LaserPair& laser, const DetectorDirection& r1,
                                   const DetectorDirection& r2, double t,
                                   const PairConstants& consts, double sigma_acc,
                                   Evaluation evaluation) {
  const double u = consts.phase_speed;
  const double tr1 = r1.retarded_time(t, u);
  const double tr2 = r2.retarded_time(t, u);
  if (tr1 < 0.0 || tr2 < 0.0) throw DomainError("two_photon_amplitude: detection before arrival (t_r < 0)");
  const double since_arrival = std::min(tr1, tr2);
  if (evaluation == Evaluation::stationary && !(since_arrival > 5.0 / consts.gamma)) {
    throw StationarityError("two_photon_amplitude: closed form needs retarded time > 5/gamma");
  }

  const auto& m1 = laser.mode1;
  const auto& m2 = laser.mode2;
  const ComplexVec3 a1_m1 = dipole_wavefunction(consts.omega_a, m1, r1, t, consts);
  const ComplexVec3 a1_m2 = dipole_wavefunction(consts.omega_a, m2, r1, t, consts);
  const ComplexVec3 s1_m1 = dipole_wavefunction(consts.omega_s, m1, r1, t, consts);
  const ComplexVec3 s1_m2 = dipole_wavefunction(consts.omega_s, m2, r1, t, consts);
  const ComplexVec3 a2_m1 = dipole_wavefunction(consts.omega_a, m1, r2, t, consts);
  const ComplexVec3 a2_m2 = dipole_wavefunction(consts.omega_a, m2, r2, t, consts);
  const ComplexVec3 s2_m1 = dipole_wavefunction(consts.omega_s, m1, r2, t, consts);
  const ComplexVec3 s2_m2 = dipole_wavefunction(consts.omega_s, m2, r2, t, consts);

  PairAmplitude out;
  out.r1 = r1;
  out.r2 = r2;
  out.t = t;
  out.delta_t = std::abs(r1.arrival_delay(u) - r2.arrival_delay(u));
  out.decay = std::exp(-0.5 * consts.gamma * out.delta_t);
  if (evaluation == Evaluation::transient) out.decay += 2.0 * std::exp(-consts.gamma * since_arrival);
  out.weight = momentum_weight(Vector3(m1.direction()), Vector3(m2.direction()), r1.r_hat, r2.r_hat, sigma_acc);

  const double scale = out.decay * out.weight;
  out.anti_stokes_first = scale * (a1_m1 * s2_m2.transpose() + a1_m2 * s2_m1.transpose());
  out.stokes_first = scale * (s1_m2 * a2_m1.transpose() + s1_m1 * a2_m2.transpose());
  out.tensor = out.anti_stokes_first + out.stokes_first;
  return out;
}

void write_csv(std::ostream& out, const std::vector<PairAmplitude>& amplitudes) {
  std::vector<std::string> header{"theta1", "phi1", "theta2", "phi2", "delta_t"};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      header.push_back("re_" + std::to_string(i) + std::to_string(j));
      header.push_back("im_" + std::to_string(i) + std::to_string(j));
    }
  }
  CsvWriter csv(out, header);
  for (const auto& a : amplitudes) {
    std::vector<double> row{std::acos(std::clamp(a.r1.r_hat.z(), -1.0, 1.0)),
                            std::atan2(a.r1.r_hat.y(), a.r1.r_hat.x()),
                            std::acos(std::clamp(a.r2.r_hat.z(), -1.0, 1.0)),
                            std::atan2(a.r2.r_hat.y(), a.r2.r_hat.x()), a.delta_t};
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        row.push_back(a.tensor(i, j).real());
        row.push_back(a.tensor(i, j).imag());
      }
    }
    csv.row(row);
  }
}

}  // namespace sas
