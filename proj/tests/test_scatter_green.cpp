#include "sas/rng.hpp"
#include "sas/scatter_green.hpp"

#include <doctest.h>

using namespace sas;

namespace {

const Complex I(0.0, 1.0);

Vector3 random_unit(Rng& rng) {
  auto [a, b] = normal_pair(rng);
  auto [c, d] = normal_pair(rng);
  (void)d;
  return Vector3(a, b, c).normalized();
}

}  // namespace

TEST_CASE("detector direction helpers") {
  const auto det = DetectorDirection::make(Vector3(0.0, 0.0, 2.0), 100.0, 0.5);
  CHECK((det.r_hat - Vector3::UnitZ()).norm() == 0.0);
  CHECK(det.theta(Vector3::UnitX()) == doctest::Approx(units::pi / 2));
  CHECK(det.far_field(1.0));
  CHECK_FALSE(det.far_field(1.01));
  CHECK(det.arrival_delay(50.0) == doctest::Approx(2.5));
  CHECK(det.retarded_time(3.0, 50.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(DetectorDirection::make(Vector3::UnitZ(), 0.0), DomainError);
  CHECK_THROWS_AS(DetectorDirection::make(Vector3::Zero(), 1.0), InvalidDirection);
}

TEST_CASE("Green dyadic in the far field") {
  const double r = 4.0 * units::pi;
  const auto det = DetectorDirection::make(Vector3::UnitZ(), r);
  const ComplexVec3 out = green_apply<double>(ComplexVec3::UnitX(), det, 0.01);
  CHECK((out - ComplexVec3::UnitX() / (16.0 * units::pi * units::pi)).norm() < 1e-16);
  CHECK(green_apply<double>(ComplexVec3::UnitZ(), det, 0.01).norm() == 0.0);
  CHECK_THROWS_AS(green_apply<double>(ComplexVec3::UnitX(), det, r), FarFieldViolation);

  auto rng = derive_stream("test/green", 2);
  for (int i = 0; i < 100; ++i) {
    const auto d = DetectorDirection::make(random_unit(rng), 1e3);
    auto [a, b] = normal_pair(rng);
    auto [c, e] = normal_pair(rng);
    const ComplexVec3 source(Complex(a, b), Complex(c, e), Complex(b, -a));
    CHECK(std::abs(dot(d.r_hat, green_apply(source, d, 1.0))) < 1e-12 * source.norm() / 1e3);
  }
}

TEST_CASE("scattered amplitude along the beam") {
  const double u = units::c / 2.0;
  const auto mode = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitX(), 10.0, u);
  const auto det = DetectorDirection::make(Vector3::UnitZ(), 500.0);
  const double t = det.arrival_delay(u);
  const auto out = scattered_mode_amplitude(mode, Complex(7.0, 0.0), det, t, u);
  CHECK(out.pattern == doctest::Approx(1.0));
  CHECK(out.retarded_time == doctest::Approx(0.0).scale(1.0));
  CHECK(out.value.norm() == doctest::Approx(49.0 / 500.0).epsilon(1e-14));
  CHECK((out.unit_polarization - ComplexVec3::UnitX()).norm() < 1e-14);
}

TEST_CASE("damped frequency decays with the retarded time") {
  const double u = units::c;
  const auto mode = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitX(), 10.0, u);
  const auto det = DetectorDirection::make(Vector3::UnitZ(), 1e3);
  const double gamma = 0.4;
  const Complex Omega(7.0, -0.5 * gamma);
  const double tr = 3.0;
  const auto out = scattered_mode_amplitude(mode, Omega, det, det.arrival_delay(u) + tr, u);
  CHECK(out.value.norm() == doctest::Approx(std::norm(Omega) / 1e3 * std::exp(-0.5 * gamma * tr)).epsilon(1e-12));
  CHECK_THROWS_AS(scattered_mode_amplitude(mode, Complex(7.0, 0.1), det, 0.0, u), GrowthError);
}

TEST_CASE("pattern factor selects the surviving polarization") {
  const double u = units::c;
  // e_p polarized (normal to the k-r plane): A = 1 at 90 degrees.
  const auto p_mode = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitY(), 10.0, u);
  const auto side = DetectorDirection::make(Vector3::UnitX(), 1e3);
  const auto p_out = scattered_mode_amplitude(p_mode, Complex(5.0), side, side.arrival_delay(u), u);
  CHECK(p_out.pattern == doctest::Approx(1.0));
  // e_t polarized: |cos theta| = 0, the amplitude vanishes.
  const auto t_mode = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitX(), 10.0, u);
  const auto t_out = scattered_mode_amplitude(t_mode, Complex(5.0), side, side.arrival_delay(u), u);
  CHECK(t_out.pattern < 1e-15);
  CHECK(t_out.value.norm() < 1e-15);
  // Diagonal polarization keeps |alpha| = 1/sqrt2 at 90 degrees.
  const auto d_mode = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3(1.0, 1.0, 0.0), 10.0, u);
  const auto d_out = scattered_mode_amplitude(d_mode, Complex(5.0), side, side.arrival_delay(u), u);
  CHECK(d_out.pattern == doctest::Approx(1.0 / std::sqrt(2.0)));
}

TEST_CASE("scattered polarization is the projected laser polarization") {
  auto rng = derive_stream("test/scatter", 9);
  const double u = units::c / 1.3;
  for (int i = 0; i < 50; ++i) {
    const Vector3 k = random_unit(rng);
    const auto mode = PlaneWaveMode::jones(k, Complex(0.6, 0.0), Complex(0.0, 0.8), 10.0, u);
    const auto det = DetectorDirection::make(random_unit(rng), 1e3);
    const auto out = scattered_mode_amplitude(mode, Complex(5.0), det, det.arrival_delay(u), u);
    // Dipole radiation: the field is (I - r r) e, of norm A(theta).
    const ComplexVec3 projected = project_transverse(mode.polarization, det.r_hat);
    CHECK(std::abs(projected.norm() - out.pattern) < 1e-12);
    CHECK((out.value - 25.0 / 1e3 * projected).norm() < 1e-12);
  }
}

TEST_CASE("momentum acceptance") {
  const Vector3 z = Vector3::UnitZ();
  CHECK(momentum_weight<double>(z, z, z, z, 0.01) == 1.0);
  const double phi = 0.1;
  const Vector3 r1(std::sin(phi), 0.0, std::cos(phi));
  const Vector3 r2(-std::sin(phi), 0.0, std::cos(phi));
  const double mismatch = 2.0 - 2.0 * std::cos(phi);
  CHECK(mismatch == doctest::Approx(0.00999).epsilon(1e-3));
  const double w = momentum_weight<double>(z, z, r1, r2, 0.01);
  CHECK(w == doctest::Approx(std::exp(-mismatch * mismatch / 2e-4)).epsilon(1e-14));
  CHECK(w == doctest::Approx(0.607).epsilon(1e-3));

  auto rng = derive_stream("test/momentum", 4);
  for (int i = 0; i < 50; ++i) {
    const Vector3 k1 = random_unit(rng), k2 = random_unit(rng), a = random_unit(rng), b = random_unit(rng);
    const double w0 = momentum_weight(k1, k2, a, b, 0.3);
    CHECK(w0 == momentum_weight(k1, k2, b, a, 0.3));
    CHECK(w0 == momentum_weight(k2, k1, a, b, 0.3));
  }
  // Narrowing the acceptance kills mismatched pairs but keeps matched ones.
  CHECK(momentum_weight<double>(z, z, r1, r2, 1e-4) < 1e-300);
  CHECK(momentum_weight<double>(z, z, z, z, 1e-4) == 1.0);
  CHECK_THROWS_AS(momentum_weight<double>(z, z, z, z, 0.0), DomainError);
  CHECK_THROWS_AS(momentum_weight<double>(z, z, z, Vector3(0, 0, 2), 0.1), InvalidDirection);
}
