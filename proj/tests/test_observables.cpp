#include "sas/csv.hpp"
#include "sas/observables.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace sas;

namespace {

MediumSpec diamond() {
  MediumSpec m;
  m.n = 2.417;
  m.omega_tilde = units::wavenumber_to_omega(1332.0);
  m.omega0 = m.omega_tilde;
  m.gamma = 0.2825;
  m.V_S = 1000.0;
  m.T = 300.0;
  return m;
}

const double pump = 3540.75;

ScatteringSetup crossed_beams(double beam_spread = 0.0) {
  const auto m = diamond();
  LaserPair l;
  l.mode1 = PlaneWaveMode::linear(Vector3(0.1, 0.0, 1.0).normalized(), Vector3::UnitY(), pump, m.phase_speed());
  l.mode2 = PlaneWaveMode::linear(Vector3(-0.1, 0.0, 1.0).normalized(), Vector3::UnitY(), pump, m.phase_speed());
  l.beam_spread = beam_spread;
  return ScatteringSetup::make(m, l, 1e3 * m.V_S, 0.01);
}

ScatteringSetup collinear(const Vector3& polarization, double beam_spread = 0.0) {
  const auto m = diamond();
  LaserPair l;
  l.mode1 = PlaneWaveMode::linear(Vector3::UnitZ(), polarization, pump, m.phase_speed());
  l.mode2 = l.mode1;
  l.beam_spread = beam_spread;
  return ScatteringSetup::make(m, l, 1e3 * m.V_S, 0.01);
}

Arm arm(const Vector3& direction, Channel channel = Channel::any) {
  Arm a;
  a.direction = direction.normalized();
  a.channel = channel;
  return a;
}

double projected(const Vector3& e, const Vector3& r_hat, const Vector3& axis) {
  return (e - e.dot(r_hat) * r_hat).dot(axis);
}

}  // namespace

TEST_CASE("ranges") {
  const Range r{0.0, 1.0, 5};
  const auto v = r.values();
  REQUIRE(v.size() == 5);
  CHECK(v[2] == doctest::Approx(0.5));
  CHECK(v.back() == 1.0);
  CHECK(Range{2.0, 2.0, 1}.values() == std::vector<double>{2.0});
  CHECK_THROWS_AS((Range{0.0, 1.0, 0}.validate("r")), ConfigError);
  CHECK_THROWS_AS((Range{1.0, 0.0, 3}.validate("r")), ConfigError);
  CHECK_THROWS_AS((Range{1.0, 1.0, 3}.validate("r")), ConfigError);
  CHECK_THROWS_AS((Range{0.0, INFINITY, 3}.validate("r")), ConfigError);
}

TEST_CASE("offset directions and analyzer axes") {
  const Vector3 z = Vector3::UnitZ();
  CHECK((offset_direction(z, 0.0, 0.0) - z).norm() == 0.0);
  const auto frame = transverse_frame<double>(z);
  const Vector3 d = offset_direction(z, 0.1, -0.2);
  CHECK(d.dot(frame.u) / d.dot(z) == doctest::Approx(0.1));
  CHECK(d.dot(frame.v) / d.dot(z) == doctest::Approx(-0.2));

  const Vector3 r = Vector3(0.3, 0.0, 1.0).normalized();
  const Vector3 par = analyzer_axis(Vector3::UnitX(), r, 0.0);
  CHECK(std::abs(par.dot(r)) < 1e-15);
  CHECK(par.x() > 0.0);
  const Vector3 perp = analyzer_axis(Vector3::UnitX(), r, units::pi / 2);
  CHECK((perp - r.cross(par)).norm() < 1e-15);
  CHECK_THROWS_AS(analyzer_axis(r, r, 0.0), GeometryError);
}

TEST_CASE("channel blocks and rates") {
  const auto setup = crossed_beams();
  const auto d1 = DetectorDirection::make(setup.laser.mode1.direction(), 1e5);
  const auto d2 = DetectorDirection::make(setup.laser.mode2.direction(), 1e5);
  const auto amp = two_photon_amplitude(setup.laser, d1, d2, stationary_time(d1, d2, setup), setup.constants,
                                        setup.sigma_acc);
  CHECK(channel_block(amp, Channel::any, Channel::any) == amp.tensor);
  CHECK(channel_block(amp, Channel::anti_stokes, Channel::stokes) == amp.anti_stokes_first);
  CHECK(channel_block(amp, Channel::stokes, Channel::any) == amp.stokes_first);
  CHECK(channel_block(amp, Channel::stokes, Channel::stokes).norm() == 0.0);

  Tensor3 block = Tensor3::Zero();
  block(0, 1) = Complex(3.0, 4.0);
  block(2, 2) = 1.0;
  CHECK(coincidence_rate(block) == doctest::Approx(26.0));
  const Vector3 x = Vector3::UnitX(), y = Vector3::UnitY();
  CHECK(coincidence_rate(block, &x, &y) == doctest::Approx(25.0));
  CHECK(coincidence_rate(block, &y, &x) == 0.0);
  CHECK(coincidence_rate(block, &x, nullptr) == doctest::Approx(25.0));
}

TEST_CASE("stationary time clears both arrivals") {
  const auto setup = crossed_beams();
  const auto d1 = DetectorDirection::make(Vector3::UnitZ(), 1e5, 2.0);
  const auto d2 = DetectorDirection::make(Vector3::UnitZ(), 2e5);
  const double u = setup.constants.phase_speed;
  CHECK(stationary_time(d1, d2, setup) == doctest::Approx(2e5 / u + 10.0 / setup.medium.gamma));
}

TEST_CASE("delay scan follows exp(-gamma delta t)") {
  const auto setup = crossed_beams();
  DelayScanConfig cfg;
  cfg.arm1 = arm(setup.laser.mode1.direction(), Channel::anti_stokes);
  cfg.arm2 = arm(setup.laser.mode2.direction(), Channel::stokes);
  const double g = setup.medium.gamma;
  cfg.delay = {0.0, 5.0 / g, 50};
  const auto scan = delay_scan(cfg, setup, 3);
  REQUIRE(scan.records.size() == 50);
  CHECK(scan.records.front().rate == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(scan.gamma_fit == doctest::Approx(g).epsilon(1e-10));
  CHECK(scan.intercept == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  for (const auto& r : scan.records) CHECK(r.rate == doctest::Approx(std::exp(-g * r.delta_t)).epsilon(1e-12));

  // A single delay of 1/gamma sits at exp(-1) of the zero-delay rate.
  DelayScanConfig two = cfg;
  two.delay = {0.0, 1.0 / g, 2};
  const auto pair = delay_scan(two, setup);
  CHECK(pair.records[1].rate == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  // Thread count does not change a single bit.
  const auto serial = delay_scan(cfg, setup, 1);
  for (std::size_t i = 0; i < scan.records.size(); ++i) CHECK(scan.records[i].raw == serial.records[i].raw);

  DelayScanConfig huge = cfg;
  huge.delay = {0.0, 700.0 / g, 3};
  CHECK_THROWS_AS(delay_scan(huge, setup), UnderflowError);
}

TEST_CASE("delay scan CSV columns") {
  const auto setup = crossed_beams();
  DelayScanConfig cfg;
  cfg.arm1 = arm(setup.laser.mode1.direction(), Channel::anti_stokes);
  cfg.arm2 = arm(setup.laser.mode2.direction(), Channel::stokes);
  cfg.delay = {0.0, 2.0, 3};
  std::stringstream out;
  write_csv(out, delay_scan(cfg, setup));
  const auto table = read_csv(out);
  CHECK(table.header == std::vector<std::string>{"delay", "delta_t", "rate", "raw"});
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[2][0] == doctest::Approx(2.0));
  CHECK(table.rows[2][1] == doctest::Approx(2.0));
}

TEST_CASE("crossed analyzers see nothing for a shared linear polarization") {
  const auto setup = crossed_beams();
  PolarizationScanConfig cfg;
  cfg.arm1 = arm(Vector3(0.12, 0.0, 1.0));
  cfg.arm2 = arm(Vector3(-0.08, 0.0, 1.0));
  const auto scan = polarization_scan(cfg, setup);
  REQUIRE(scan.records.size() == 37);
  CHECK(scan.parallel_raw > 0.0);
  CHECK(scan.crossed_over_parallel <= 1e-24);
  // Parallel analyzers are the maximum of the scan.
  CHECK(scan.records.front().rate == doctest::Approx(1.0));
  CHECK(scan.records.back().rate == doctest::Approx(1.0));
  CHECK(scan.records[18].rate < 1e-24);
}

TEST_CASE("rotated analyzer reference follows Malus' law on the projected field") {
  // Collinear lasers polarized at 30 degrees, analyzers referenced to x.
  const double chi = units::pi / 6.0;
  const Vector3 e(std::cos(chi), std::sin(chi), 0.0);
  const auto setup = collinear(e);
  PolarizationScanConfig cfg;
  cfg.arm1 = arm(Vector3(0.05, 0.02, 1.0));
  cfg.arm2 = arm(Vector3(-0.05, -0.02, 1.0));
  cfg.reference = Vector3::UnitX();
  const auto scan = polarization_scan(cfg, setup);

  const Vector3 r2 = cfg.arm2.direction;
  const Vector3 px = (Vector3::UnitX() - r2.x() * r2).normalized();
  const Vector3 cx = r2.cross(px);
  const double along = projected(e, r2, px);
  const double across = projected(e, r2, cx);
  CHECK(scan.crossed_over_parallel == doctest::Approx(across * across / (along * along)).epsilon(1e-9));
  CHECK(scan.crossed_over_parallel > 0.1);

  double peak = 0.0;
  std::vector<double> oracle;
  for (const auto& rec : scan.records) {
    const Vector3 a = std::cos(rec.arm2.analyzer_angle) * px + std::sin(rec.arm2.analyzer_angle) * cx;
    oracle.push_back(std::pow(projected(e, r2, a), 2));
    peak = std::max(peak, oracle.back());
  }
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    CHECK(scan.records[i].raw / scan.parallel_raw == doctest::Approx(oracle[i] / (along * along)).epsilon(1e-9));
  }
}

TEST_CASE("angular map of sharp beams peaks on the conserving direction") {
  const auto setup = collinear(Vector3::UnitX());
  AngularMapConfig cfg;
  cfg.arm1 = arm(Vector3::UnitZ());
  cfg.arm2 = arm(Vector3::UnitZ());
  cfg.x2 = {-0.05, 0.05, 21};
  const auto map = angular_map(cfg, setup);
  REQUIRE(map.records.size() == 21);
  CHECK(map.records[10].rate == 1.0);
  for (std::size_t i = 0; i < 21; ++i) {
    if (i != 10) CHECK(map.records[i].rate < map.records[10].rate);
    CHECK(map.records[i].rate == doctest::Approx(map.records[20 - i].rate).epsilon(1e-9));
  }
  // Sharp beams: the rate holds the squared acceptance, width sigma_acc/sqrt2.
  CHECK(map.width2_x == doctest::Approx(0.01 / std::sqrt(2.0)).epsilon(0.02));

  // Scanning arm 1 instead gives the mirror-image map.
  AngularMapConfig swapped = cfg;
  swapped.x1 = cfg.x2;
  swapped.x2 = Range{};
  const auto other = angular_map(swapped, setup);
  REQUIRE(other.records.size() == 21);
  for (std::size_t i = 0; i < 21; ++i) CHECK(other.records[i].rate == doctest::Approx(map.records[i].rate).epsilon(1e-9));
  CHECK(other.width1_x == doctest::Approx(map.width2_x).epsilon(1e-9));
}

TEST_CASE("angular map of focused beams widens by sqrt2 times the spread") {
  const double spread = 0.05;
  const auto setup = collinear(Vector3::UnitX(), spread);
  AngularMapConfig cfg;
  cfg.id = "test-angular";
  cfg.arm1 = arm(Vector3::UnitZ());
  cfg.arm2 = arm(Vector3::UnitZ());
  cfg.x2 = {-0.3, 0.3, 31};
  cfg.samples = 4000;
  cfg.seed = 5;
  const auto map = angular_map(cfg, setup, 4);
  CHECK(map.expected_width == doctest::Approx(std::sqrt(2.0 * spread * spread + 0.5e-4)));
  CHECK(map.width2_x == doctest::Approx(spread * std::sqrt(2.0)).epsilon(0.15));
  // Same seed, different threads: identical map.
  const auto again = angular_map(cfg, setup, 1);
  for (std::size_t i = 0; i < map.records.size(); ++i) CHECK(map.records[i].raw == again.records[i].raw);
  cfg.samples = 0;
  CHECK_THROWS_AS(angular_map(cfg, setup), ConfigError);
}

TEST_CASE("perturbed lasers stay valid") {
  auto setup = collinear(Vector3::UnitX(), 0.05);
  const auto l = perturbed_lasers(setup.laser, 1.0, -0.5, 0.2, 2.0, setup.constants.phase_speed);
  CHECK_NOTHROW(l.validate());
  CHECK(l.mode1.direction().dot(Vector3::UnitZ()) < 1.0);
  CHECK(l.mode1.k.norm() * setup.constants.phase_speed == doctest::Approx(pump));
}

TEST_CASE("pair spectrum line shape") {
  const auto m = diamond();
  const auto grid = centered_grid(m, 1600, 0.125);  // 200 gamma span
  CHECK(grid.values()[800] == doctest::Approx(m.omega_tilde).epsilon(1e-15));
  const auto s = pair_spectrum(m, grid);
  CHECK(s.peak_omega == doctest::Approx(m.omega_tilde).epsilon(1e-15));
  CHECK(s.peak_density == doctest::Approx(4.0 / (m.gamma * m.gamma)));
  CHECK(std::abs(s.fwhm - m.gamma) <= s.step);
  // Half maximum sits at +-gamma/2.
  const double half_point = 1.0 / (0.25 * m.gamma * m.gamma + 0.25 * m.gamma * m.gamma);
  CHECK(half_point == doctest::Approx(0.5 * s.peak_density));
  CHECK(s.integral == doctest::Approx(2.0 * units::pi / m.gamma).epsilon(0.01));
  // Exact area on [omega_tilde - 100 gamma, omega_tilde + 99.875 gamma].
  const double span_area = 2.0 / m.gamma * (std::atan(200.0) + std::atan(199.75));
  CHECK(s.integral == doctest::Approx(span_area).epsilon(1e-3));
}

TEST_CASE("pair spectrum grid errors") {
  const auto m = diamond();
  CHECK_THROWS_AS(pair_spectrum(m, centered_grid(m, 400, 0.3)), ResolutionError);
  CHECK_THROWS_AS(pair_spectrum(m, centered_grid(m, 60, 0.125)), DomainError);
  CHECK_THROWS_AS(centered_grid(m, 1, 0.1), ConfigError);
}

TEST_CASE("spectrum transform is the direct Fourier sum") {
  const auto m = diamond();
  const auto s = pair_spectrum(m, centered_grid(m, 1 << 14, 0.125));
  const auto tr = spectrum_delay_transform(s, m, 5.0 / m.gamma, 12);
  REQUIRE(tr.delta.size() >= 2);
  CHECK(tr.delta.front() == 0.0);
  CHECK(tr.delta.back() <= 5.0 / m.gamma);
  for (std::size_t i = 0; i < tr.delta.size(); ++i) {
    Complex sum = 0.0;
    for (std::size_t n = 0; n < s.omega.size(); ++n) sum += s.density[n] * std::polar(1.0, -s.omega[n] * tr.delta[i]);
    const double direct = std::abs(sum) * s.step * m.gamma / (2.0 * units::pi);
    CHECK(tr.modulus[i] == doctest::Approx(direct).epsilon(1e-9));
    CHECK(tr.model[i] == doctest::Approx(std::exp(-0.5 * m.gamma * tr.delta[i])));
  }
  CHECK(tr.max_error < 1e-3);
}

TEST_CASE("event sampling") {
  const std::vector<double> single = {0.0, 0.0, 3.0, 0.0};
  for (const auto& e : sample_events(single, 1, 1000)) CHECK(e.cell == 2);

  const std::size_t cells = 20;
  const std::vector<double> uniform(cells, 1.0);
  const auto events = sample_events(uniform, 42, 1000000, 1e-6);
  std::vector<double> counts(cells, 0.0);
  for (const auto& e : events) counts[e.cell] += 1.0;
  const double expected = 1e6 / double(cells);
  // Five standard deviations of a multinomial cell count.
  for (double c : counts) CHECK(std::abs(c - expected) < 5.0 * std::sqrt(expected));
  // Exponential gaps at 1e-6 per ps: mean spacing 1e6 ps.
  CHECK(events.back().timestamp / 1e6 == doctest::Approx(1e6).epsilon(0.01));
  CHECK(std::is_sorted(events.begin(), events.end(),
                       [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; }));

  const auto a = sample_events(uniform, 7, 500);
  const auto b = sample_events(uniform, 7, 500);
  const auto c = sample_events(uniform, 8, 500);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].cell == b[i].cell && a[i].timestamp == b[i].timestamp;
    differs = differs || a[i].cell != c[i].cell;
  }
  CHECK(same);
  CHECK(differs);

  const std::vector<double> zeros(5, 0.0);
  CHECK_THROWS_AS(sample_events(zeros, 1, 10), DegenerateDistribution);
  const std::vector<double> negative = {1.0, -1.0};
  CHECK_THROWS_AS(sample_events(negative, 1, 10), DomainError);
  CHECK_THROWS_AS(sample_events(uniform, 1, 0), DomainError);
}
