#pragma once

// Complex vector-field primitives: helicity bases, plane-wave modes,
// Riemann-Silberstein assembly, transverse projection and the dipole
// pattern factor. Everything here is a pure function templated on the real
// scalar type.

#include "sas/errors.hpp"
#include "sas/types.hpp"

#include <cmath>
#include <span>
#include <string>

namespace sas {

/// Checks that `v` is finite and of unit length within `unit_tolerance`.
template <typename Scalar>
const Vec3<Scalar>& require_unit(const Vec3<Scalar>& v, const char* what) {
  if (!v.allFinite()) {
    throw InvalidDirection(std::string(what) + ": non-finite direction");
  }
  const Scalar norm = v.norm();
  if (norm == Scalar(0)) {
    throw InvalidDirection(std::string(what) + ": zero-length direction");
  }
  if (std::abs(norm - Scalar(1)) > unit_tolerance<Scalar>()) {
    throw InvalidDirection(std::string(what) + ": direction is not a unit vector");
  }
  return v;
}

/// Normalizes an arbitrary nonzero direction.
template <typename Scalar>
Vec3<Scalar> unit_direction(const Vec3<Scalar>& v, const char* what = "direction") {
  if (!v.allFinite() || v.norm() == Scalar(0)) {
    throw InvalidDirection(std::string(what) + ": zero-length or non-finite direction");
  }
  return v.normalized();
}

template <typename Scalar>
struct TransverseFrame {
  Vec3<Scalar> u;  // first transverse axis
  Vec3<Scalar> v;  // k x u, so (u, v, k) is right-handed
};

/// Deterministic real transverse frame for a unit direction. The seed axis is
/// the coordinate axis with the smallest |component| (lowest index on ties);
/// should that axis be parallel to k the next axis in (x, y, z) is used.
template <typename Scalar>
TransverseFrame<Scalar> transverse_frame(const Vec3<Scalar>& k_hat) {
  require_unit(k_hat, "transverse_frame");
  Eigen::Index axis = 0;
  k_hat.cwiseAbs().minCoeff(&axis);
  Vec3<Scalar> seed = Vec3<Scalar>::Unit(axis);
  if (std::abs(seed.dot(k_hat)) > Scalar(1) - unit_tolerance<Scalar>()) {
    seed = Vec3<Scalar>::Unit((axis + 1) % 3);
  }
  Vec3<Scalar> u = (seed - seed.dot(k_hat) * k_hat).normalized();
  Vec3<Scalar> v = k_hat.cross(u);
  return {u, v};
}

template <typename Scalar>
struct HelicityBasis {
  CVec3<Scalar> plus;
  CVec3<Scalar> minus;
};

/// Helicity eigenvectors with k x e(+-) = -+ i e(+-).
/// For k = z this gives e(+) = (x + i y)/sqrt2.
template <typename Scalar>
HelicityBasis<Scalar> helicity_basis(const Vec3<Scalar>& k_hat) {
  using C = std::complex<Scalar>;
  const auto frame = transverse_frame(k_hat);
  const Scalar s = Scalar(1) / std::sqrt(Scalar(2));
  const CVec3<Scalar> u = frame.u.template cast<C>();
  const CVec3<Scalar> v = frame.v.template cast<C>();
  const C i(0, 1);
  return {s * (u + i * v), s * (u - i * v)};
}

/// Cross product of a real vector with a complex one. Written out because
/// Eigen's cross() conjugates complex results.
template <typename Scalar>
CVec3<Scalar> cross(const Vec3<Scalar>& a, const CVec3<Scalar>& b) {
  return CVec3<Scalar>(a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(),
                       a.x() * b.y() - a.y() * b.x());
}

/// Bilinear (non-conjugating) dot product of a real and a complex vector.
template <typename Scalar>
std::complex<Scalar> dot(const Vec3<Scalar>& a, const CVec3<Scalar>& b) {
  return a.template cast<std::complex<Scalar>>().dot(b);
}

/// A single plane-wave mode. `polarization` is a unit complex vector
/// transverse to `k`; `omega` must equal u|k| for the medium it lives in.
template <typename Scalar>
struct BasicPlaneWaveMode {
  using C = std::complex<Scalar>;

  Vec3<Scalar> k = Vec3<Scalar>::UnitZ();
  CVec3<Scalar> polarization = CVec3<Scalar>::UnitX();
  C amplitude{1, 0};
  Scalar omega = 1;

  Vec3<Scalar> direction() const { return k.normalized(); }
  Scalar wavenumber() const { return k.norm(); }

  static BasicPlaneWaveMode helical(const Vec3<Scalar>& k_hat, int helicity, Scalar omega,
                                    Scalar phase_speed, C amplitude = C(1, 0)) {
    if (helicity != 1 && helicity != -1) {
      throw DomainError("helicity label must be +1 or -1");
    }
    const auto basis = helicity_basis(k_hat);
    return {k_hat * (omega / phase_speed), helicity > 0 ? basis.plus : basis.minus, amplitude,
            omega};
  }

  /// Jones pair (alpha, beta) on the deterministic transverse frame (u, v).
  static BasicPlaneWaveMode jones(const Vec3<Scalar>& k_hat, C alpha, C beta, Scalar omega,
                                  Scalar phase_speed, C amplitude = C(1, 0)) {
    const Scalar norm2 = std::norm(alpha) + std::norm(beta);
    if (std::abs(norm2 - Scalar(1)) > unit_tolerance<Scalar>()) {
      throw NormalizationError("Jones pair is not normalized");
    }
    const auto frame = transverse_frame(k_hat);
    CVec3<Scalar> pol = alpha * frame.u.template cast<C>() + beta * frame.v.template cast<C>();
    return {k_hat * (omega / phase_speed), pol, amplitude, omega};
  }

  /// Linear polarization along the transverse part of `axis`.
  static BasicPlaneWaveMode linear(const Vec3<Scalar>& k_hat, const Vec3<Scalar>& axis,
                                   Scalar omega, Scalar phase_speed, C amplitude = C(1, 0)) {
    require_unit(k_hat, "linear mode");
    const Vec3<Scalar> t = axis - axis.dot(k_hat) * k_hat;
    if (!t.allFinite() || t.norm() < Scalar(1e-9) * axis.norm() || axis.norm() == Scalar(0)) {
      throw GeometryError("polarization axis has no component transverse to k");
    }
    return {k_hat * (omega / phase_speed), t.normalized().template cast<C>(), amplitude, omega};
  }
};

using PlaneWaveMode = BasicPlaneWaveMode<double>;

/// Throws DispersionViolation unless omega = u|k| (relative 1e-10).
template <typename Scalar>
void check_dispersion(const BasicPlaneWaveMode<Scalar>& mode, Scalar phase_speed) {
  const Scalar expected = phase_speed * mode.k.norm();
  const Scalar scale = std::max(Scalar(1), std::abs(mode.omega));
  if (!(std::abs(mode.omega - expected) <= Scalar(1e-10) * scale)) {
    throw DispersionViolation("mode violates omega = u|k|");
  }
}

/// Riemann-Silberstein photon wave function of a mode superposition,
/// Psi = sum_h (E_h + h i cB_h)/sqrt2 with c B = k x E for every mode.
/// The real fields E_h and cB_h are built in full (both frequency signs); the
/// negative-frequency halves cancel in the combination.
template <typename Scalar>
CVec3<Scalar> rs_vector(std::span<const BasicPlaneWaveMode<Scalar>> modes, const Vec3<Scalar>& r,
                        Scalar t, Scalar phase_speed = Scalar(units::c)) {
  using C = std::complex<Scalar>;
  const C i(0, 1);
  const Scalar inv_sqrt2 = Scalar(1) / std::sqrt(Scalar(2));
  CVec3<Scalar> psi = CVec3<Scalar>::Zero();
  for (const auto& mode : modes) {
    check_dispersion(mode, phase_speed);
    const Vec3<Scalar> k_hat = mode.direction();
    const auto basis = helicity_basis(k_hat);
    const C phase = std::exp(i * (mode.k.dot(r) - mode.omega * t));
    const CVec3<Scalar> field = mode.amplitude * mode.polarization;
    for (int h : {1, -1}) {
      const CVec3<Scalar>& e_h = h > 0 ? basis.plus : basis.minus;
      const CVec3<Scalar> amp = e_h.dot(field) * e_h;  // helicity component
      const CVec3<Scalar> b_amp = cross(k_hat, amp);
      const CVec3<Scalar> electric = i * (amp * phase - amp.conjugate() * std::conj(phase));
      const CVec3<Scalar> magnetic = i * (b_amp * phase - b_amp.conjugate() * std::conj(phase));
      psi += inv_sqrt2 * (electric + Scalar(h) * i * magnetic);
    }
  }
  return psi;
}

/// e - (e . r) r. Not normalized.
template <typename Scalar>
CVec3<Scalar> project_transverse(const CVec3<Scalar>& e, const Vec3<Scalar>& r_hat) {
  require_unit(r_hat, "project_transverse");
  return e - dot(r_hat, e) * r_hat.template cast<std::complex<Scalar>>();
}

/// A(theta) = sqrt(|alpha|^2 + |beta|^2 cos^2 theta).
template <typename Scalar>
Scalar pattern_factor(std::complex<Scalar> alpha, std::complex<Scalar> beta, Scalar theta) {
  const Scalar a2 = std::norm(alpha);
  const Scalar b2 = std::norm(beta);
  if (std::abs(a2 + b2 - Scalar(1)) > unit_tolerance<Scalar>()) {
    throw NormalizationError("pattern_factor: Jones pair is not normalized");
  }
  const Scalar c = std::cos(theta);
  return std::sqrt(a2 + b2 * c * c);
}

/// Linear basis of the scattering geometry: e_p normal to the (k, r) plane,
/// e_t in that plane transverse to k, e_theta in that plane transverse to r.
template <typename Scalar>
struct ScatteringFrame {
  Vec3<Scalar> e_p;
  Vec3<Scalar> e_t;
  Vec3<Scalar> e_theta;
  Scalar theta = 0;
};

template <typename Scalar>
ScatteringFrame<Scalar> scattering_frame(const Vec3<Scalar>& k_hat, const Vec3<Scalar>& r_hat) {
  require_unit(k_hat, "scattering_frame k");
  require_unit(r_hat, "scattering_frame r");
  ScatteringFrame<Scalar> f;
  const Vec3<Scalar> n = k_hat.cross(r_hat);
  const Scalar sin_theta = n.norm();
  f.theta = std::atan2(sin_theta, k_hat.dot(r_hat));
  // Forward/backward scattering: the plane is undefined, pick the mode frame.
  f.e_p = sin_theta > Scalar(1e-12) ? Vec3<Scalar>(n / sin_theta) : transverse_frame(k_hat).u;
  f.e_t = f.e_p.cross(k_hat);
  f.e_theta = f.e_p.cross(r_hat);
  return f;
}

/// (alpha, beta) of a transverse polarization on (e_p, e_t).
template <typename Scalar>
std::pair<std::complex<Scalar>, std::complex<Scalar>> jones_in_frame(
    const CVec3<Scalar>& polarization, const ScatteringFrame<Scalar>& frame) {
  return {dot(frame.e_p, polarization), dot(frame.e_t, polarization)};
}

}  // namespace sas
