#pragma once

#include <Eigen/Dense>

#include <complex>
#include <limits>

namespace sas {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

template <typename Scalar>
using CVec3 = Eigen::Matrix<std::complex<Scalar>, 3, 1>;

using Complex = std::complex<double>;
using Vector3 = Vec3<double>;
using ComplexVec3 = CVec3<double>;
using Tensor3 = Eigen::Matrix3cd;

// Internal units: lengths in um, times in ps, angular frequencies in rad/ps.
namespace units {

inline constexpr double pi = 3.14159265358979323846;
// Vacuum speed of light [um/ps].
inline constexpr double c = 299.792458;
// hbar / k_B [K ps]; hbar*omega/(k_B T) = hbar_over_kB * omega[rad/ps] / T[K].
inline constexpr double hbar_over_kB = 7.638232577577;
// Speed of light in cm/ps, for wavenumber conversions.
inline constexpr double c_cm_per_ps = 2.99792458e-2;

/// Raman shift in cm^-1 to angular frequency in rad/ps.
inline constexpr double wavenumber_to_omega(double wavenumber_cm) {
  return 2.0 * pi * c_cm_per_ps * wavenumber_cm;
}

}  // namespace units

template <typename Scalar>
constexpr Scalar unit_tolerance() {
  constexpr Scalar eps = std::numeric_limits<Scalar>::epsilon();
  return Scalar(1e-12) > Scalar(64) * eps ? Scalar(1e-12) : Scalar(64) * eps;
}

}  // namespace sas
