#pragma once

// Far-field scattering geometry: retarded dyadic Green function, scattered
// single-mode amplitudes and the momentum-conservation acceptance.

#include "sas/field_kernel.hpp"

#include <cmath>

namespace sas {

template <typename Scalar>
struct BasicDetectorDirection {
  Vec3<Scalar> r_hat = Vec3<Scalar>::UnitZ();
  Scalar r = 1;      // distance from the scattering volume [um]
  Scalar delay = 0;  // extra optical delay in this detection path [ps]

  static BasicDetectorDirection make(const Vec3<Scalar>& direction, Scalar distance, Scalar delay = 0) {
    if (!(distance > Scalar(0))) throw DomainError("detector distance must be > 0");
    return {unit_direction(direction, "detector"), distance, delay};
  }

  /// Angle to a reference (laser) direction.
  Scalar theta(const Vec3<Scalar>& k_hat) const {
    return std::atan2(k_hat.cross(r_hat).norm(), k_hat.dot(r_hat));
  }
  /// Far field requires r >= 100 times the source's linear size.
  bool far_field(Scalar source_extent) const { return r >= Scalar(100) * source_extent; }
  /// Time of flight to this detector including the delay line.
  Scalar arrival_delay(Scalar phase_speed) const { return r / phase_speed + delay; }
  /// t_r = t - r/u - delay.
  Scalar retarded_time(Scalar t, Scalar phase_speed) const { return t - arrival_delay(phase_speed); }
};

using DetectorDirection = BasicDetectorDirection<double>;

/// Far-field retarded Green dyadic applied to a source direction:
/// source . (I - r r) / (4 pi r). `source_extent` is the linear size of the
/// scattering volume.
template <typename Scalar>
CVec3<Scalar> green_apply(const CVec3<Scalar>& source, const BasicDetectorDirection<Scalar>& det,
                          Scalar source_extent) {
  if (!det.far_field(source_extent)) {
    throw FarFieldViolation("green_apply: detector closer than 100 source sizes");
  }
  return project_transverse(source, det.r_hat) / (Scalar(4) * Scalar(units::pi) * det.r);
}

template <typename Scalar>
struct BasicScatteredAmplitude {
  CVec3<Scalar> value;
  std::complex<Scalar> omega;
  Scalar retarded_time = 0;
  Scalar pattern = 0;                 // A(theta)
  CVec3<Scalar> unit_polarization;    // normalized e_perp (zero when A = 0)
};

using ScatteredAmplitude = BasicScatteredAmplitude<double>;

/// A(theta) (Omega^2 / r) exp(-i Omega t_r) e_perp for one plane-wave mode
/// observed along det.r_hat. Omega may carry a damping (negative) imaginary part.
template <typename Scalar>
BasicScatteredAmplitude<Scalar> scattered_mode_amplitude(const BasicPlaneWaveMode<Scalar>& mode,
                                                         std::complex<Scalar> Omega,
                                                         const BasicDetectorDirection<Scalar>& det,
                                                         Scalar t, Scalar phase_speed) {
  using C = std::complex<Scalar>;
  if (Omega.imag() > Scalar(0)) throw GrowthError("scattered_mode_amplitude: Im(Omega) > 0");
  require_unit(det.r_hat, "detector");
  const Vec3<Scalar> k_hat = mode.direction();
  const auto frame = scattering_frame(k_hat, det.r_hat);
  const auto [alpha, beta] = jones_in_frame(mode.polarization, frame);
  BasicScatteredAmplitude<Scalar> out;
  out.omega = Omega;
  out.retarded_time = det.retarded_time(t, phase_speed);
  out.pattern = pattern_factor(alpha, beta, frame.theta);
  const CVec3<Scalar> e_perp = alpha * frame.e_p.template cast<C>() +
                               beta * std::cos(frame.theta) * frame.e_theta.template cast<C>();
  out.unit_polarization = out.pattern > Scalar(0) ? CVec3<Scalar>(e_perp / out.pattern)
                                                  : CVec3<Scalar>(CVec3<Scalar>::Zero());
  const C factor = Omega * Omega / det.r * std::exp(C(0, -1) * Omega * out.retarded_time);
  out.value = out.pattern * factor * out.unit_polarization;
  return out;
}

/// exp(-|r1 + r2 - k1 - k2|^2 / (2 sigma^2)): Gaussian acceptance standing in
/// for the momentum Kronecker delta.
template <typename Scalar>
Scalar momentum_weight(const Vec3<Scalar>& k1_hat, const Vec3<Scalar>& k2_hat,
                       const Vec3<Scalar>& r1_hat, const Vec3<Scalar>& r2_hat, Scalar sigma_acc) {
  require_unit(k1_hat, "momentum_weight k1");
  require_unit(k2_hat, "momentum_weight k2");
  require_unit(r1_hat, "momentum_weight r1");
  require_unit(r2_hat, "momentum_weight r2");
  if (!(sigma_acc > Scalar(0))) throw DomainError("momentum_weight: sigma_acc must be > 0");
  const Scalar mismatch = ((r1_hat + r2_hat) - (k1_hat + k2_hat)).squaredNorm();
  return std::exp(-mismatch / (Scalar(2) * sigma_acc * sigma_acc));
}

}  // namespace sas
