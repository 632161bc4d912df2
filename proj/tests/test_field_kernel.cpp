#include "sas/field_kernel.hpp"
#include "sas/rng.hpp"

#include <doctest.h>

#include <vector>

using namespace sas;

namespace {

const Complex I(0.0, 1.0);

Vector3 random_unit(Rng& rng) {
  auto [a, b] = normal_pair(rng);
  auto [c, d] = normal_pair(rng);
  (void)d;
  return Vector3(a, b, c).normalized();
}

// |k x e + h i e| for the helicity-h eigenvector e.
double eigen_residual(const Vector3& k, const ComplexVec3& e, int h) {
  return (cross(k, e) + double(h) * I * e).norm();
}

}  // namespace

TEST_CASE("helicity basis along z is the canonical circular pair") {
  const auto b = helicity_basis<double>(Vector3::UnitZ());
  const double s = 1.0 / std::sqrt(2.0);
  CHECK((b.plus - ComplexVec3(s, I * s, 0.0)).norm() < 1e-15);
  CHECK((b.minus - ComplexVec3(s, -I * s, 0.0)).norm() < 1e-15);
  CHECK((cross<double>(Vector3::UnitZ(), b.plus) + I * b.plus).norm() < 1e-15);
}

TEST_CASE("helicity basis along x matches (y + i z)/sqrt2 up to a phase") {
  const auto b = helicity_basis<double>(Vector3::UnitX());
  const double s = 1.0 / std::sqrt(2.0);
  const ComplexVec3 expected(0.0, s, I * s);
  // Equal up to a global phase when |<expected|plus>| = 1.
  CHECK(std::abs(std::abs(expected.dot(b.plus)) - 1.0) < 1e-14);
  CHECK(eigen_residual(Vector3::UnitX(), b.plus, 1) < 1e-14);
  CHECK(eigen_residual(Vector3::UnitX(), b.minus, -1) < 1e-14);
}

TEST_CASE("helicity basis on random directions") {
  auto rng = derive_stream("test/helicity", 7);
  for (int i = 0; i < 200; ++i) {
    const Vector3 k = random_unit(rng);
    const auto b = helicity_basis(k);
    CHECK(eigen_residual(k, b.plus, 1) < 1e-12);
    CHECK(eigen_residual(k, b.minus, -1) < 1e-12);
    CHECK(std::abs(dot(k, b.plus)) < 1e-12);
    CHECK(std::abs(dot(k, b.minus)) < 1e-12);
    CHECK(std::abs(b.plus.squaredNorm() - 1.0) < 1e-12);
    CHECK(std::abs(b.plus.dot(b.minus)) < 1e-12);
  }
}

TEST_CASE("helicity basis rejects degenerate directions") {
  CHECK_THROWS_AS(helicity_basis<double>(Vector3::Zero()), InvalidDirection);
  CHECK_THROWS_AS(helicity_basis<double>(Vector3(1.0, 1.0, 0.0)), InvalidDirection);
  CHECK_THROWS_AS(helicity_basis<double>(Vector3(NAN, 0.0, 1.0)), InvalidDirection);
}

TEST_CASE("transverse frame tie-break falls through to the next axis") {
  // Along an axis every seed choice is well defined and right-handed.
  for (const Vector3& k : {Vector3(Vector3::UnitX()), Vector3(Vector3::UnitY()), Vector3(Vector3::UnitZ()), Vector3(-1.0, 0.0, 0.0)}) {
    const auto f = transverse_frame(k);
    CHECK(std::abs(f.u.dot(k)) < 1e-15);
    CHECK(std::abs(f.u.norm() - 1.0) < 1e-15);
    CHECK((f.u.cross(f.v) - k).norm() < 1e-15);
  }
}

TEST_CASE("rs_vector of an empty superposition is zero") {
  std::vector<PlaneWaveMode> none;
  CHECK(rs_vector<double>(none, Vector3(1.0, 2.0, 3.0), 0.5).norm() == 0.0);
}

TEST_CASE("single matched-helicity mode gives i sqrt2 e_plus at the origin") {
  const double omega = 2.0;
  const std::vector<PlaneWaveMode> modes = {PlaneWaveMode::helical(Vector3::UnitZ(), 1, omega, units::c)};
  const ComplexVec3 psi = rs_vector<double>(modes, Vector3::Zero(), 0.0);
  const ComplexVec3 expected = I * std::sqrt(2.0) * helicity_basis<double>(Vector3::UnitZ()).plus;
  CHECK((psi - expected).norm() < 1e-14);

  // Away from the origin the same vector carries exp(i (k z - omega t)).
  const Vector3 r(0.3, -0.2, 40.0);
  const double t = 0.7;
  const Complex phase = std::exp(I * (omega / units::c * r.z() - omega * t));
  CHECK((rs_vector<double>(modes, r, t) - phase * expected).norm() < 1e-13);
}

TEST_CASE("opposite-helicity mode has the conjugate circular vector") {
  const std::vector<PlaneWaveMode> modes = {PlaneWaveMode::helical(Vector3::UnitZ(), -1, 1.0, units::c)};
  const ComplexVec3 psi = rs_vector<double>(modes, Vector3::Zero(), 0.0);
  // E and cB pieces add for h = -1 as well, giving i sqrt2 e_minus.
  const ComplexVec3 expected = I * std::sqrt(2.0) * helicity_basis<double>(Vector3::UnitZ()).minus;
  CHECK((psi - expected).norm() < 1e-14);
}

TEST_CASE("rs_vector is linear in the mode list") {
  const double u = units::c / 1.5;
  const Vector3 k = Vector3(0.2, -0.4, 1.0).normalized();
  const auto a = PlaneWaveMode::jones(k, Complex(0.6, 0.0), Complex(0.0, 0.8), 3.0, u, Complex(0.5, 0.1));
  const auto b = PlaneWaveMode::linear(Vector3(-k), Vector3::UnitX(), 4.0, u, Complex(-0.2, 0.9));
  const Vector3 r(1.0, 2.0, -3.0);
  const std::vector<PlaneWaveMode> both = {a, b};
  const std::vector<PlaneWaveMode> only_a = {a};
  const std::vector<PlaneWaveMode> only_b = {b};
  const ComplexVec3 sum = rs_vector<double>(only_a, r, 0.4, u) + rs_vector<double>(only_b, r, 0.4, u);
  CHECK((rs_vector<double>(both, r, 0.4, u) - sum).norm() < 1e-13);
}

TEST_CASE("rs_vector enforces the dispersion relation") {
  auto mode = PlaneWaveMode::helical(Vector3::UnitZ(), 1, 2.0, units::c);
  mode.omega *= 1.001;
  const std::vector<PlaneWaveMode> modes = {mode};
  CHECK_THROWS_AS(rs_vector<double>(modes, Vector3::Zero(), 0.0), DispersionViolation);
  // The same mode is consistent in a medium with the matching phase speed.
  CHECK_NOTHROW(rs_vector<double>(modes, Vector3::Zero(), 0.0, units::c * 1.001));
}

TEST_CASE("mode constructors validate their inputs") {
  CHECK_THROWS_AS(PlaneWaveMode::helical(Vector3::UnitZ(), 0, 1.0, units::c), DomainError);
  CHECK_THROWS_AS(PlaneWaveMode::jones(Vector3::UnitZ(), Complex(1.0), Complex(1.0), 1.0, units::c),
                  NormalizationError);
  CHECK_THROWS_AS(PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitZ(), 1.0, units::c), GeometryError);
}

TEST_CASE("project_transverse examples") {
  const ComplexVec3 x = ComplexVec3::UnitX();
  CHECK((project_transverse<double>(x, Vector3::UnitZ()) - x).norm() < 1e-15);
  CHECK(project_transverse<double>(x, Vector3::UnitX()).norm() < 1e-15);
  const Vector3 r = Vector3(1.0, 0.0, 1.0).normalized();
  const ComplexVec3 p = project_transverse<double>(x, r);
  CHECK((p - ComplexVec3(0.5, 0.0, -0.5)).norm() < 1e-15);
  CHECK(std::abs(p.norm() - 1.0 / std::sqrt(2.0)) < 1e-15);
  CHECK_THROWS_AS(project_transverse<double>(x, Vector3(0.0, 0.0, 2.0)), InvalidDirection);
}

TEST_CASE("project_transverse is idempotent and transverse") {
  auto rng = derive_stream("test/projection", 3);
  for (int i = 0; i < 100; ++i) {
    const Vector3 r = random_unit(rng);
    auto [a, b] = normal_pair(rng);
    auto [c, d] = normal_pair(rng);
    auto [e, f] = normal_pair(rng);
    const ComplexVec3 v(Complex(a, b), Complex(c, d), Complex(e, f));
    const ComplexVec3 once = project_transverse(v, r);
    CHECK(std::abs(dot(r, once)) < 1e-12);
    CHECK((project_transverse(once, r) - once).norm() < 1e-14);
  }
}

TEST_CASE("pattern factor examples") {
  CHECK(pattern_factor(Complex(1.0), Complex(0.0), 1.234) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pattern_factor(Complex(0.0), Complex(1.0), units::pi / 3.0) == doctest::Approx(0.5).epsilon(1e-14));
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(pattern_factor(Complex(s), Complex(s), units::pi / 2.0) == doctest::Approx(s).epsilon(1e-14));
  CHECK_THROWS_AS(pattern_factor(Complex(1.0), Complex(0.5), 0.0), NormalizationError);
}

TEST_CASE("pattern factor does not depend on the helicity label") {
  // A helical mode has |alpha| = |beta| = 1/sqrt2 in any linear frame, so
  // both helicities give the same A(theta).
  const Vector3 k = Vector3(0.3, 0.1, 1.0).normalized();
  const Vector3 r = Vector3(-0.5, 0.7, 0.2).normalized();
  const auto frame = scattering_frame(k, r);
  const auto basis = helicity_basis(k);
  const auto [ap, bp] = jones_in_frame(basis.plus, frame);
  const auto [am, bm] = jones_in_frame(basis.minus, frame);
  CHECK(std::abs(pattern_factor(ap, bp, frame.theta) - pattern_factor(am, bm, frame.theta)) < 1e-14);
}

TEST_CASE("scattering frame geometry") {
  const Vector3 k = Vector3::UnitZ();
  const Vector3 r = Vector3(std::sin(0.4), 0.0, std::cos(0.4));
  const auto f = scattering_frame(k, r);
  CHECK(f.theta == doctest::Approx(0.4).epsilon(1e-14));
  CHECK((f.e_p - Vector3::UnitY()).norm() < 1e-15);
  CHECK(std::abs(f.e_t.dot(k)) < 1e-15);
  CHECK(std::abs(f.e_theta.dot(r)) < 1e-15);
  // Forward scattering still yields an orthonormal frame.
  const auto forward = scattering_frame(k, k);
  CHECK(forward.theta == 0.0);
  CHECK(std::abs(forward.e_p.dot(forward.e_t)) < 1e-15);
}
