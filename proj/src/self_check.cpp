#include "sas/self_check.hpp"

#include "sas/errors.hpp"
#include "sas/field_grid.hpp"
#include "sas/observables.hpp"
#include "sas/rng.hpp"
#include "sas/scenario.hpp"
#include "sas/spectral.hpp"

#include <json.hpp>

#include <Eigen/Geometry>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace sas {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

MediumSpec bath_medium(double gamma) {
  MediumSpec m;
  m.omega_tilde = 100.0;
  m.omega0 = 100.0;
  m.gamma = gamma;
  return m;
}

MediumSpec raman_medium(double gamma) {
  MediumSpec m;
  m.n = 2.417;
  m.omega_tilde = units::wavenumber_to_omega(1332.0);
  m.omega0 = m.omega_tilde;
  m.gamma = gamma;
  m.V_S = 1000.0;
  return m;
}

constexpr double raman_gamma = 0.2825;
const double pump_omega = 2.0 * units::pi * units::c / 0.532;

Vector3 random_unit(Rng& rng) {
  for (;;) {
    const auto [a, b] = normal_pair(rng);
    const auto [c, d] = normal_pair(rng);
    (void)d;
    const Vector3 v(a, b, c);
    if (v.norm() > 1e-6) return v.normalized();
  }
}

/// Random laser pair with a shared linear polarization normal to both
/// directions, plus detectors obtained by rotating the laser directions about
/// their sum, so r1 + r2 = k1 + k2 holds exactly.
struct Geometry {
  LaserPair laser;
  DetectorDirection d1, d2;
};

Geometry conserving_geometry(Rng& rng, double phase_speed, bool random_jones) {
  for (;;) {
    const Vector3 k1 = random_unit(rng);
    const Vector3 k2 = random_unit(rng);
    const Vector3 normal = k1.cross(k2);
    const Vector3 sum = k1 + k2;
    if (normal.norm() < 0.05 || sum.norm() < 0.05) continue;
    Geometry g;
    if (random_jones) {
      const double a = 2.0 * units::pi * uniform01(rng);
      const double ph = 2.0 * units::pi * uniform01(rng);
      const Complex alpha(std::cos(a), 0.0);
      const Complex beta = std::sin(a) * std::exp(Complex(0.0, ph));
      g.laser.mode1 = PlaneWaveMode::jones(k1, alpha, beta, pump_omega, phase_speed);
      g.laser.mode2 = PlaneWaveMode::jones(k2, beta, alpha, pump_omega, phase_speed);
    } else {
      g.laser.mode1 = PlaneWaveMode::linear(k1, normal, pump_omega, phase_speed);
      g.laser.mode2 = PlaneWaveMode::linear(k2, normal, pump_omega, phase_speed);
    }
    const Eigen::AngleAxisd rot(2.0 * units::pi * uniform01(rng), sum.normalized());
    // Path differences of a few ps keep exp(-gamma delta_t / 2) well above underflow.
    const double r1 = 1e5 * (1.0 + 1e-3 * uniform01(rng));
    const double r2 = 1e5 * (1.0 + 1e-3 * uniform01(rng));
    g.d1 = DetectorDirection::make(rot * k1, r1, 2.0 * uniform01(rng));
    g.d2 = DetectorDirection::make(rot * k2, r2, 2.0 * uniform01(rng));
    return g;
  }
}

double gamma_seen(int id, const SelfCheckOptions& o, double gamma) {
  return (o.corrupt_gamma && *o.corrupt_gamma == id) ? gamma * o.corruption_factor : gamma;
}

// --- individual criteria -------------------------------------------------------

CheckResult analytic_signal(const SelfCheckOptions&) {
  CheckResult r{1, "analytic signal", false, 0.0, 1e-10, "", 0.0};
  auto rng = derive_stream("self-check/analytic", 1);
  const std::size_t n = 1024;
  const double dt = units::pi / 8.0;  // Nyquist at 8 rad/ps; modes in [1, 2] rad/ps
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<PlaneWaveMode> modes;
    const int count = 1 + static_cast<int>(uniform01(rng) * 5.0);
    for (int m = 0; m < count; ++m) {
      const double omega = 1.0 + uniform01(rng);
      const Complex amp = std::polar(0.2 + uniform01(rng), 2.0 * units::pi * uniform01(rng));
      modes.push_back(PlaneWaveMode::helical(random_unit(rng), uniform01(rng) < 0.5 ? 1 : -1, omega, units::c, amp));
    }
    const Vector3 where(uniform01(rng), uniform01(rng), uniform01(rng));
    std::vector<Complex> series(n);
    for (int comp = 0; comp < 3; ++comp) {
      for (std::size_t i = 0; i < n; ++i) {
        series[i] = rs_vector<double>(modes, where, dt * static_cast<double>(i))[comp];
      }
      double energy = 0.0;
      for (const auto& s : series) energy += std::norm(s);
      if (energy == 0.0) continue;
      worst = std::max(worst, analytic_signal_residual(series));
    }
  }
  r.measured = worst;
  r.passed = worst < r.threshold;
  r.detail = "max negative-frequency energy fraction over 20 superpositions x 3 components";
  return r;
}

// Lattice wave vectors with integer norm keep every mode periodic in a box
// of side L over the time period L / c.
std::vector<PlaneWaveMode> lattice_modes(Rng& rng, int helicity, double L, const std::vector<Vector3>& lattice,
                                         std::size_t count) {
  std::vector<PlaneWaveMode> modes;
  for (std::size_t m = 0; m < count; ++m) {
    Vector3 v = lattice[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(lattice.size()))];
    if (uniform01(rng) < 0.5) v = -v;
    const double kmag = 2.0 * units::pi * v.norm() / L;
    const Complex amp = std::polar(0.2 + uniform01(rng), 2.0 * units::pi * uniform01(rng));
    modes.push_back(PlaneWaveMode::helical(v.normalized(), helicity, units::c * kmag, units::c, amp));
  }
  return modes;
}

std::array<GridAxis, 4> box_axes(double L, std::size_t nx, std::size_t ny, std::size_t nz, std::size_t nt) {
  const double period = L / units::c;
  return {GridAxis{0.0, L / static_cast<double>(nx), nx}, GridAxis{0.0, L / static_cast<double>(ny), ny},
          GridAxis{0.0, L / static_cast<double>(nz), nz}, GridAxis{0.0, period / static_cast<double>(nt), nt}};
}

CheckResult free_space(const SelfCheckOptions&) {
  CheckResult r{2, "free-space evolution", false, 0.0, 1e-10, "", 0.0};
  auto rng = derive_stream("self-check/free-space", 2);
  const double L = 10.0;
  const std::vector<Vector3> lattice = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0}, {1, 2, 2}, {2, 1, 2}, {0, 3, 4}};
  double spectral = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const int h = trial % 2 == 0 ? 1 : -1;
    const auto modes = lattice_modes(rng, h, L, lattice, 4);
    const auto grid = sample_field(modes, box_axes(L, 16, 16, 16, 24));
    double scale = 0.0;
    for (const auto& v : grid.values()) scale = std::max(scale, v.norm());
    const double omega_max = units::c * 2.0 * units::pi * 5.0 / L;
    const auto res = free_space_residual(grid, h, Derivative::spectral);
    spectral = std::max(spectral, res.value() / (scale * omega_max));
  }

  // Finite differences on an x-directed superposition, halving every step;
  // c dt = h / 2 keeps the space and time truncation errors from cancelling.
  const std::vector<Vector3> axis_lattice = {{1, 0, 0}, {2, 0, 0}};
  const auto modes = lattice_modes(rng, 1, L, axis_lattice, 3);
  std::vector<double> fd;
  for (std::size_t nx : {16, 32, 64}) {
    const auto grid = sample_field(modes, box_axes(L, nx, 4, 4, 2 * nx));
    fd.push_back(free_space_residual(grid, 1, Derivative::finite_difference).value());
  }
  const double ratio1 = fd[0] / fd[1];
  const double ratio2 = fd[1] / fd[2];
  const bool ratios_ok = std::abs(ratio1 / 4.0 - 1.0) <= 0.2 && std::abs(ratio2 / 4.0 - 1.0) <= 0.2;
  r.measured = spectral;
  r.passed = spectral < r.threshold && ratios_ok;
  r.detail = "relative spectral residual; finite-difference ratios per halving " + fmt(ratio1) + ", " + fmt(ratio2) +
             " (target 4 +- 20%)";
  return r;
}

CheckResult weisskopf_wigner(const SelfCheckOptions& o) {
  CheckResult r{3, "Weisskopf-Wigner decay", false, 0.0, 0.02, "", 0.0};
  const double gamma = 1.0;
  const MediumSpec used = bath_medium(gamma_seen(3, o, gamma));
  const auto grid = discretize_reservoir(used, 401, 40.0 * gamma);
  const auto series = oracle_decay(grid, used, 3.0 / gamma, 300);
  const auto fit = fit_decay_rate(series.times, series.survival, 0.5 / gamma, 3.0 / gamma);
  r.measured = std::abs(fit.gamma / gamma - 1.0);
  r.passed = r.measured <= r.threshold;
  r.detail = "J=401, bandwidth 40 gamma, fitted gamma " + fmt(fit.gamma) + " on gamma t in [0.5, 3]";
  return r;
}

CheckResult commutator(const SelfCheckOptions& o) {
  CheckResult r{4, "commutator sum rule", false, 0.0, 1e-2, "", 0.0};
  const double gamma = 1.0;
  const MediumSpec spec = bath_medium(gamma);
  const MediumSpec used = bath_medium(gamma_seen(4, o, gamma));
  std::vector<double> worst;
  for (std::size_t J : {101, 201, 401}) {
    const auto grid = discretize_reservoir(used, J, 40.0 * gamma);
    double w = 0.0;
    const std::size_t n = 400;
    for (std::size_t i = 0; i <= n; ++i) {
      const double t = grid.validity_window() * static_cast<double>(i) / static_cast<double>(n);
      w = std::max(w, commutator_defect(t, grid, spec));
    }
    worst.push_back(w);
  }
  const bool monotone = worst[1] < worst[0] && worst[2] < worst[1];
  r.measured = worst[2];
  r.passed = worst[2] < r.threshold && monotone;
  r.detail = "max defect over the validity window for J=101/201/401: " + fmt(worst[0]) + ", " + fmt(worst[1]) + ", " +
             fmt(worst[2]) + (monotone ? " (decreasing)" : " (not decreasing)");
  return r;
}

CheckResult exchange_integral(const SelfCheckOptions& o) {
  CheckResult r{5, "Lorentzian exchange integral", false, 0.0, 1e-4, "", 0.0};
  const double gamma = 1.0;
  const MediumSpec spec = bath_medium(gamma);
  const MediumSpec used = bath_medium(gamma_seen(5, o, gamma));
  double worst = 0.0, worst_at = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double gd = 0.25 * i;
    const double delta_r = gd / gamma * units::c;
    const auto q = lorentzian_exchange_quadrature(delta_r, spec, units::c, std::numeric_limits<double>::infinity());
    const Complex closed = lorentzian_exchange(delta_r, used, units::c);
    const double rel = std::abs(q.value - closed) / std::abs(closed);
    if (rel > worst) {
      worst = rel;
      worst_at = gd;
    }
  }
  r.measured = worst;
  r.passed = worst < r.threshold;
  r.detail = "omega_tilde = 100 gamma, gamma|Delta| in [0, 5]; worst at gamma|Delta| = " + fmt(worst_at);
  return r;
}

CheckResult stationary_decay(const SelfCheckOptions& o) {
  CheckResult r{6, "stationary pair decay", false, 0.0, 1e-10, "", 0.0};
  const MediumSpec used = raman_medium(gamma_seen(6, o, raman_gamma));
  LaserPair laser;
  const Vector3 k1 = Vector3(0.1, 0.0, 1.0).normalized();
  const Vector3 k2 = Vector3(-0.1, 0.0, 1.0).normalized();
  laser.mode1 = PlaneWaveMode::linear(k1, Vector3::UnitY(), pump_omega, used.phase_speed());
  laser.mode2 = PlaneWaveMode::linear(k2, Vector3::UnitY(), pump_omega, used.phase_speed());
  const auto setup = ScatteringSetup::make(used, laser, 1e3 * used.V_S, 0.01);
  DelayScanConfig cfg;
  cfg.arm1.direction = k1;
  cfg.arm2.direction = k2;
  cfg.delay = {0.0, 5.0 / raman_gamma, 50};
  const auto scan = delay_scan(cfg, setup, o.threads);
  r.measured = std::abs(scan.gamma_fit / raman_gamma - 1.0);
  r.passed = r.measured <= r.threshold;
  r.detail = "50-point delay scan, fitted gamma " + fmt(scan.gamma_fit) + " vs " + fmt(raman_gamma);
  return r;
}

CheckResult crossed_null(const SelfCheckOptions& o) {
  CheckResult r{7, "cross-polarization null", false, 0.0, 1e-24, "", 0.0};
  const MediumSpec medium = raman_medium(raman_gamma);
  auto rng = derive_stream("self-check/crossed", 7);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = conserving_geometry(rng, medium.phase_speed(), false);
    const auto setup = ScatteringSetup::make(medium, g.laser, 1e3 * medium.V_S, 0.01);
    PolarizationScanConfig cfg;
    cfg.arm1 = {g.d1.r_hat, g.d1.r, g.d1.delay, Channel::any};
    cfg.arm2 = {g.d2.r_hat, g.d2.r, g.d2.delay, Channel::any};
    cfg.angle2 = {0.0, 0.0, 1};
    const auto scan = polarization_scan(cfg, setup, o.threads);
    if (!(scan.parallel_raw > 0.0)) throw DomainError("crossed_null: parallel rate vanished");
    worst = std::max(worst, scan.crossed_over_parallel);
  }
  r.measured = worst;
  r.passed = worst <= r.threshold;
  r.detail = "max crossed/parallel rate over 100 momentum-conserving geometries";
  return r;
}

CheckResult angular_correlation(const SelfCheckOptions& o) {
  CheckResult r{8, "angular correlation", false, 0.0, 0.15, "", 0.0};
  const MediumSpec medium = raman_medium(raman_gamma);
  LaserPair laser;
  laser.mode1 = PlaneWaveMode::linear(Vector3::UnitZ(), Vector3::UnitY(), pump_omega, medium.phase_speed());
  laser.mode2 = laser.mode1;
  laser.beam_spread = 0.05;
  const auto setup = ScatteringSetup::make(medium, laser, 1e3 * medium.V_S, 0.01);
  AngularMapConfig cfg;
  cfg.id = "self-check/angular";
  cfg.seed = 8;
  cfg.arm1.direction = Vector3::UnitZ();
  cfg.arm2.direction = Vector3::UnitZ();
  cfg.x2 = {-0.3, 0.3, 61};
  cfg.samples = 100000;
  const auto map = angular_map(cfg, setup, o.threads);
  const double target = 0.05 * std::sqrt(2.0);
  r.measured = std::abs(map.width2_x / target - 1.0);
  r.passed = r.measured <= r.threshold;
  r.detail = "marginal RMS width " + fmt(map.width2_x) + " rad vs beam_spread*sqrt2 = " + fmt(target) +
             " (acceptance-broadened expectation " + fmt(map.expected_width) + ")";
  return r;
}

CheckResult spectrum_duality(const SelfCheckOptions& o) {
  CheckResult r{9, "spectrum/decay duality", false, 0.0, 1e-6, "", 0.0};
  const double gamma = 1.0;
  const MediumSpec spec = bath_medium(gamma);
  const MediumSpec used = bath_medium(gamma_seen(9, o, gamma));
  const std::size_t n = std::size_t{1} << 23;
  const auto grid = centered_grid(spec, n, 0.125);
  const auto spectrum = pair_spectrum(used, grid);
  const auto transform = spectrum_delay_transform(spectrum, used, 5.0 / gamma, 101);
  double err = 0.0;
  for (std::size_t i = 0; i < transform.delta.size(); ++i) {
    err = std::max(err, std::abs(transform.modulus[i] - std::exp(-0.5 * gamma * transform.delta[i])));
  }
  const bool fwhm_ok = std::abs(spectrum.fwhm - gamma) <= spectrum.step;
  r.measured = err;
  r.passed = err < r.threshold && fwhm_ok;
  r.detail = "2^23 points at gamma/8; FWHM " + fmt(spectrum.fwhm) + " vs " + fmt(gamma) + " (step " +
             fmt(spectrum.step) + ")";
  return r;
}

CheckResult thermal(const SelfCheckOptions&) {
  CheckResult r{10, "thermal occupation", false, 0.0, 2.5e-3, "", 0.0};
  r.measured = thermal_phonon_number(units::wavenumber_to_omega(1332.0), 300.0);
  r.passed = r.measured >= 1.0e-3 && r.measured <= 2.5e-3;
  r.detail = "diamond 1332 cm^-1 at 300 K, bracket [1.0e-3, 2.5e-3]";
  return r;
}

CheckResult exchange_symmetry(const SelfCheckOptions&) {
  CheckResult r{11, "exchange symmetry", false, 0.0, 1e-12, "", 0.0};
  const MediumSpec medium = raman_medium(raman_gamma);
  auto rng = derive_stream("self-check/symmetry", 11);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = conserving_geometry(rng, medium.phase_speed(), true);
    const auto setup = ScatteringSetup::make(medium, g.laser, 1e3 * medium.V_S, 0.01);
    const double t = stationary_time(g.d1, g.d2, setup);
    const auto a = two_photon_amplitude(g.laser, g.d1, g.d2, t, setup.constants, setup.sigma_acc);
    const auto b = two_photon_amplitude(g.laser, g.d2, g.d1, t, setup.constants, setup.sigma_acc);
    const double scale = a.tensor.cwiseAbs().maxCoeff();
    if (!(scale > 0.0)) throw DomainError("exchange_symmetry: amplitude vanished");
    const double d1 = (b.tensor.transpose() - a.tensor).cwiseAbs().maxCoeff();
    const double d2 = (b.anti_stokes_first.transpose() - a.stokes_first).cwiseAbs().maxCoeff();
    worst = std::max({worst, d1 / scale, d2 / scale});
  }
  r.measured = worst;
  r.passed = worst <= r.threshold;
  r.detail = "max relative |T(r2,r1)^T - T(r1,r2)| over 100 random configurations";
  return r;
}

CheckResult determinism(const SelfCheckOptions& o) {
  CheckResult r{12, "determinism", false, 0.0, 0.0, "", 0.0};
  namespace fs = std::filesystem;
  const auto scenario = parse_scenario_text(reference_scenario_text());
  const fs::path base = fs::temp_directory_path() /
                        ("sasim-determinism-" + std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  RunOptions first, second;
  first.out_dir = base / "a";
  first.threads = o.threads;
  second.out_dir = base / "b";
  second.threads = std::max(1u, o.threads) + 1;  // a different parallelism degree
  const auto ra = run_scenario(scenario, first);
  const auto rb = run_scenario(scenario, second);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  std::size_t differing = 0;
  if (ra.files.size() != rb.files.size()) differing = std::max(ra.files.size(), rb.files.size());
  for (std::size_t i = 0; i < std::min(ra.files.size(), rb.files.size()); ++i) {
    if (ra.files[i].filename() != rb.files[i].filename() || slurp(ra.files[i]) != slurp(rb.files[i])) ++differing;
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  r.measured = static_cast<double>(differing);
  r.passed = differing == 0 && !ra.files.empty() && ra.exit_code == 0;
  r.detail = std::to_string(ra.files.size()) + " files compared across two runs of the reference scenario";
  return r;
}

const char* criterion_name(int id) {
  static const char* names[] = {"analytic signal",          "free-space evolution",   "Weisskopf-Wigner decay",
                                "commutator sum rule",      "Lorentzian exchange integral",
                                "stationary pair decay",    "cross-polarization null", "angular correlation",
                                "spectrum/decay duality",   "thermal occupation",     "exchange symmetry",
                                "determinism"};
  return (id >= 1 && id <= criterion_count) ? names[id - 1] : "unknown";
}

}  // namespace

CheckResult run_criterion(int id, const SelfCheckOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  CheckResult r;
  try {
    switch (id) {
      case 1: r = analytic_signal(options); break;
      case 2: r = free_space(options); break;
      case 3: r = weisskopf_wigner(options); break;
      case 4: r = commutator(options); break;
      case 5: r = exchange_integral(options); break;
      case 6: r = stationary_decay(options); break;
      case 7: r = crossed_null(options); break;
      case 8: r = angular_correlation(options); break;
      case 9: r = spectrum_duality(options); break;
      case 10: r = thermal(options); break;
      case 11: r = exchange_symmetry(options); break;
      case 12: r = determinism(options); break;
      default: throw DomainError("no criterion " + std::to_string(id));
    }
  } catch (const std::exception& e) {
    r = CheckResult{id, criterion_name(id), false, std::numeric_limits<double>::quiet_NaN(), 0.0,
                    std::string("error: ") + e.what(), 0.0};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

SelfCheckReport run_self_check(const SelfCheckOptions& options) {
  SelfCheckReport report;
  for (int id = 1; id <= criterion_count; ++id) {
    if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
      continue;
    }
    report.results.push_back(run_criterion(id, options));
  }
  return report;
}

bool SelfCheckReport::all_passed() const {
  return std::all_of(results.begin(), results.end(), [](const CheckResult& r) { return r.passed; });
}

std::string SelfCheckReport::to_json() const {
  nlohmann::json j;
  j["passed"] = all_passed();
  j["criteria"] = nlohmann::json::array();
  for (const auto& r : results) {
    j["criteria"].push_back({{"id", r.id},
                             {"name", r.name},
                             {"passed", r.passed},
                             {"measured", r.measured},
                             {"threshold", r.threshold},
                             {"detail", r.detail},
                             {"seconds", r.seconds}});
  }
  return j.dump(2) + "\n";
}

std::string SelfCheckReport::to_text() const {
  std::ostringstream out;
  for (const auto& r : results) {
    out << (r.passed ? "PASS" : "FAIL") << "  " << (r.id < 10 ? "0" : "") << r.id << " " << r.name
        << ": measured " << fmt(r.measured) << ", threshold " << fmt(r.threshold) << " (" << r.detail << ") ["
        << fmt(r.seconds) << " s]\n";
  }
  return out.str();
}

}  // namespace sas
