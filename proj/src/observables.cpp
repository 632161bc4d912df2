#include "sas/observables.hpp"

#include "sas/csv.hpp"
#include "sas/errors.hpp"
#include "sas/parallel.hpp"
#include "sas/rng.hpp"
#include "sas/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace sas {

std::vector<double> Range::values() const {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = start;
    return out;
  }
  const double step = (stop - start) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = start + step * static_cast<double>(i);
  out.back() = stop;
  return out;
}

void Range::validate(const std::string& what) const {
  if (count == 0) throw ConfigError(what + ": grid must not be empty");
  if (!std::isfinite(start) || !std::isfinite(stop)) throw ConfigError(what + ": grid ends must be finite");
  if (stop < start) throw ConfigError(what + ": grid must be increasing");
  if (count > 1 && !(stop > start)) throw ConfigError(what + ": grid with several points needs stop > start");
}

ScatteringSetup ScatteringSetup::make(const MediumSpec& medium, const LaserPair& laser, double V_Q,
                                      double sigma_acc) {
  laser.validate();
  if (!(sigma_acc > 0.0)) throw DomainError("sigma_acc must be > 0");
  return {medium, laser, derive_constants(medium, laser, V_Q), sigma_acc};
}

Tensor3 channel_block(const PairAmplitude& amplitude, Channel arm1, Channel arm2) {
  const bool as_first = (arm1 != Channel::stokes) && (arm2 != Channel::anti_stokes);
  const bool s_first = (arm1 != Channel::anti_stokes) && (arm2 != Channel::stokes);
  Tensor3 block = Tensor3::Zero();
  if (as_first) block += amplitude.anti_stokes_first;
  if (s_first) block += amplitude.stokes_first;
  return block;
}

double coincidence_rate(const Tensor3& block, const Vector3* analyzer1, const Vector3* analyzer2) {
  if (analyzer1 == nullptr && analyzer2 == nullptr) return block.squaredNorm();
  const ComplexVec3 a1 = analyzer1 ? ComplexVec3(analyzer1->cast<Complex>()) : ComplexVec3::Zero();
  const ComplexVec3 a2 = analyzer2 ? ComplexVec3(analyzer2->cast<Complex>()) : ComplexVec3::Zero();
  if (analyzer1 == nullptr) return (block * a2).squaredNorm();
  if (analyzer2 == nullptr) return (a1.transpose() * block).squaredNorm();
  return std::norm(Complex(a1.transpose() * block * a2));
}

double stationary_time(const DetectorDirection& d1, const DetectorDirection& d2,
                       const ScatteringSetup& setup) {
  const double u = setup.constants.phase_speed;
  return std::max(d1.arrival_delay(u), d2.arrival_delay(u)) + 10.0 / setup.medium.gamma;
}

Vector3 offset_direction(const Vector3& center, double x, double y) {
  const Vector3 c = unit_direction(center, "offset_direction");
  const auto frame = transverse_frame(c);
  return unit_direction(Vector3(c + x * frame.u + y * frame.v), "offset_direction");
}

Vector3 analyzer_axis(const Vector3& reference, const Vector3& arm, double angle) {
  const Vector3 r = unit_direction(arm, "analyzer arm");
  const Vector3 p = reference - reference.dot(r) * r;
  if (!p.allFinite() || p.norm() < 1e-9 * std::max(1.0, reference.norm())) {
    throw GeometryError("analyzer reference has no component transverse to its arm");
  }
  const Vector3 par = p.normalized();
  return std::cos(angle) * par + std::sin(angle) * r.cross(par);
}

namespace {

ArmSetting setting_of(const DetectorDirection& d, double x = 0.0, double y = 0.0, double angle = 0.0) {
  return {d.r_hat, x, y, d.delay, angle};
}

void normalize_rates(std::vector<CoincidenceRecord>& records) {
  double peak = 0.0;
  for (const auto& r : records) peak = std::max(peak, r.raw);
  for (auto& r : records) r.rate = peak > 0.0 ? r.raw / peak : 0.0;
}

PairAmplitude stationary_amplitude(const LaserPair& laser, const DetectorDirection& d1,
                                   const DetectorDirection& d2, const ScatteringSetup& setup) {
  return two_photon_amplitude(laser, d1, d2, stationary_time(d1, d2, setup), setup.constants,
                              setup.sigma_acc);
}

struct Marginal {
  double mean = 0.0;
  double width = 0.0;
};

Marginal weighted_moments(const std::vector<double>& x, const std::vector<double>& w) {
  double sw = 0.0, sx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
  }
  if (!(sw > 0.0)) return {};
  const double mean = sx / sw;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sxx += w[i] * (x[i] - mean) * (x[i] - mean);
  return {mean, std::sqrt(sxx / sw)};
}

}  // namespace

DelayScan delay_scan(const DelayScanConfig& config, const ScatteringSetup& setup, unsigned threads) {
  config.delay.validate("delay");
  const auto delays = config.delay.values();
  const double u = setup.constants.phase_speed;
  const auto d1 = config.arm1.detector();
  for (double extra : delays) {
    const double dt = std::abs(d1.arrival_delay(u) - config.arm2.detector(extra).arrival_delay(u));
    if (setup.medium.gamma * dt > 600.0) {
      throw UnderflowError("delay_scan: gamma * delta_t exceeds 600; rates would underflow");
    }
  }

  DelayScan scan;
  scan.records.resize(delays.size());
  parallel_for(delays.size(), threads, [&](std::size_t i) {
    const auto d2 = config.arm2.detector(delays[i]);
    const auto amp = stationary_amplitude(setup.laser, d1, d2, setup);
    auto& rec = scan.records[i];
    rec.arm1 = setting_of(d1);
    rec.arm2 = setting_of(d2);
    rec.delta_t = amp.delta_t;
    rec.raw = coincidence_rate(channel_block(amp, config.arm1.channel, config.arm2.channel));
  });
  normalize_rates(scan.records);

  // Least-squares line through log(rate) against delta_t.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (const auto& r : scan.records) {
    if (!(r.rate > 0.0)) continue;
    const double y = std::log(r.rate);
    sx += r.delta_t;
    sy += y;
    sxx += r.delta_t * r.delta_t;
    sxy += r.delta_t * y;
    n += 1;
  }
  const double denom = n * sxx - sx * sx;
  if (n >= 2 && denom > 0.0) {
    const double slope = (n * sxy - sx * sy) / denom;
    scan.gamma_fit = -slope;
    scan.intercept = (sy - slope * sx) / n;
    double ss = 0.0;
    for (const auto& r : scan.records) {
      if (!(r.rate > 0.0)) continue;
      const double res = std::log(r.rate) - (scan.intercept + slope * r.delta_t);
      ss += res * res;
    }
    scan.residual = std::sqrt(ss / n);
  } else {
    scan.gamma_fit = std::numeric_limits<double>::quiet_NaN();
  }
  return scan;
}

PolarizationScan polarization_scan(const PolarizationScanConfig& config, const ScatteringSetup& setup,
                                   unsigned threads) {
  config.angle2.validate("angle2");
  Vector3 reference;
  if (config.reference) {
    reference = *config.reference;
  } else {
    const ComplexVec3& pol = setup.laser.mode1.polarization;
    reference = pol.real().norm() > 1e-12 ? Vector3(pol.real()) : Vector3(pol.imag());
  }
  const auto d1 = config.arm1.detector();
  const auto d2 = config.arm2.detector();
  const auto amp = stationary_amplitude(setup.laser, d1, d2, setup);
  const Tensor3 block = channel_block(amp, config.arm1.channel, config.arm2.channel);

  const Vector3 a1 = analyzer_axis(reference, d1.r_hat, config.angle1);
  const auto angles = config.angle2.values();
  PolarizationScan scan;
  scan.records.resize(angles.size());
  parallel_for(angles.size(), threads, [&](std::size_t i) {
    const Vector3 a2 = analyzer_axis(reference, d2.r_hat, angles[i]);
    auto& rec = scan.records[i];
    rec.arm1 = setting_of(d1, 0.0, 0.0, config.angle1);
    rec.arm2 = setting_of(d2, 0.0, 0.0, angles[i]);
    rec.delta_t = amp.delta_t;
    rec.raw = coincidence_rate(block, &a1, &a2);
  });
  normalize_rates(scan.records);

  const Vector3 par1 = analyzer_axis(reference, d1.r_hat, 0.0);
  const Vector3 par2 = analyzer_axis(reference, d2.r_hat, 0.0);
  // Built as r x par directly so cos(pi/2) rounding does not leak in.
  const Vector3 cross2 = d2.r_hat.cross(par2);
  scan.parallel_raw = coincidence_rate(block, &par1, &par2);
  scan.crossed_raw = coincidence_rate(block, &par1, &cross2);
  scan.crossed_over_parallel = scan.parallel_raw > 0.0 ? scan.crossed_raw / scan.parallel_raw : 0.0;
  return scan;
}

LaserPair perturbed_lasers(const LaserPair& laser, double n1x, double n1y, double n2x, double n2y,
                           double phase_speed) {
  auto perturb = [&](const PlaneWaveMode& m, double nx, double ny) {
    const Vector3 k_hat = offset_direction(m.direction(), laser.beam_spread * nx, laser.beam_spread * ny);
    ComplexVec3 pol = m.polarization - dot(k_hat, m.polarization) * k_hat.cast<Complex>();
    if (pol.norm() < 1e-12) throw GeometryError("focused beam: polarization parallel to a sampled direction");
    PlaneWaveMode out = m;
    out.k = k_hat * (m.omega / phase_speed);
    out.polarization = pol / pol.norm();
    return out;
  };
  LaserPair out = laser;
  out.mode1 = perturb(laser.mode1, n1x, n1y);
  out.mode2 = perturb(laser.mode2, n2x, n2y);
  return out;
}

AngularMap angular_map(const AngularMapConfig& config, const ScatteringSetup& setup, unsigned threads) {
  for (const auto* r : {&config.x1, &config.y1, &config.x2, &config.y2}) r->validate("angular grid");
  if (config.samples == 0) throw ConfigError("angular_map: sample budget must be >= 1");
  if (!(setup.laser.beam_spread >= 0.0)) throw DomainError("angular_map: beam_spread must be >= 0");

  struct Cell {
    DetectorDirection det;
    double x, y;
  };
  auto cells_of = [](const Arm& arm, const Range& xr, const Range& yr) {
    std::vector<Cell> cells;
    for (double y : yr.values()) {
      for (double x : xr.values()) {
        cells.push_back({DetectorDirection::make(offset_direction(arm.direction, x, y), arm.distance, arm.delay),
                         x, y});
      }
    }
    return cells;
  };
  const auto cells1 = cells_of(config.arm1, config.x1, config.y1);
  const auto cells2 = cells_of(config.arm2, config.x2, config.y2);

  // Common laser samples for every cell; a sharp beam needs only one.
  const double u = setup.constants.phase_speed;
  std::vector<LaserPair> lasers;
  if (setup.laser.beam_spread == 0.0) {
    lasers.push_back(setup.laser);
  } else {
    auto rng = derive_stream(config.id, config.seed);
    lasers.reserve(config.samples);
    for (std::size_t s = 0; s < config.samples; ++s) {
      const auto [a, b] = normal_pair(rng);
      const auto [c, d] = normal_pair(rng);
      lasers.push_back(perturbed_lasers(setup.laser, a, b, c, d, u));
    }
  }
  std::vector<std::pair<Vector3, Vector3>> k_hats;
  k_hats.reserve(lasers.size());
  for (const auto& l : lasers) k_hats.emplace_back(l.mode1.direction(), l.mode2.direction());

  AngularMap map;
  map.cells1 = cells1.size();
  map.cells2 = cells2.size();
  map.records.resize(cells1.size() * cells2.size());
  const double t = stationary_time(cells1.front().det, cells2.front().det, setup);
  parallel_for(map.records.size(), threads, [&](std::size_t idx) {
    const auto& c1 = cells1[idx / cells2.size()];
    const auto& c2 = cells2[idx % cells2.size()];
    const double tc = std::max(t, stationary_time(c1.det, c2.det, setup));
    double sum = 0.0;
    for (std::size_t s = 0; s < lasers.size(); ++s) {
      // Acceptance below 1e-40 contributes under 1e-80 relative; skip it.
      const double w = momentum_weight(k_hats[s].first, k_hats[s].second, c1.det.r_hat, c2.det.r_hat,
                                       setup.sigma_acc);
      if (w < 1e-40) continue;
      const auto amp = two_photon_amplitude(lasers[s], c1.det, c2.det, tc, setup.constants, setup.sigma_acc);
      sum += coincidence_rate(channel_block(amp, config.arm1.channel, config.arm2.channel));
    }
    auto& rec = map.records[idx];
    rec.arm1 = setting_of(c1.det, c1.x, c1.y);
    rec.arm2 = setting_of(c2.det, c2.x, c2.y);
    rec.delta_t = std::abs(c1.det.arrival_delay(u) - c2.det.arrival_delay(u));
    rec.raw = sum / static_cast<double>(lasers.size());
  });
  normalize_rates(map.records);

  std::vector<double> w1(cells1.size(), 0.0), w2(cells2.size(), 0.0);
  for (std::size_t i = 0; i < map.records.size(); ++i) {
    w1[i / cells2.size()] += map.records[i].raw;
    w2[i % cells2.size()] += map.records[i].raw;
  }
  auto coords = [](const std::vector<Cell>& cells, bool x_axis) {
    std::vector<double> v;
    for (const auto& c : cells) v.push_back(x_axis ? c.x : c.y);
    return v;
  };
  map.width1_x = weighted_moments(coords(cells1, true), w1).width;
  map.width1_y = weighted_moments(coords(cells1, false), w1).width;
  map.width2_x = weighted_moments(coords(cells2, true), w2).width;
  map.width2_y = weighted_moments(coords(cells2, false), w2).width;
  // The rate carries the squared acceptance, whose width is sigma_acc/sqrt2.
  map.expected_width = std::sqrt(2.0 * setup.laser.beam_spread * setup.laser.beam_spread +
                                 0.5 * setup.sigma_acc * setup.sigma_acc);
  return map;
}

Range centered_grid(const MediumSpec& medium, std::size_t points, double step_over_gamma) {
  if (points < 2) throw ConfigError("spectrum: need at least two points");
  if (!(step_over_gamma > 0.0)) throw ConfigError("spectrum: step must be > 0");
  const double step = step_over_gamma * medium.gamma;
  const double start = medium.omega_tilde - step * static_cast<double>(points / 2);
  return {start, start + step * static_cast<double>(points - 1), points};
}

PairSpectrum pair_spectrum(const MediumSpec& medium, const Range& omega) {
  omega.validate("spectrum");
  if (omega.count < 2) throw ConfigError("spectrum: need at least two points");
  if (!(medium.gamma > 0.0)) throw DomainError("pair_spectrum: gamma must be > 0");
  PairSpectrum s;
  s.step = (omega.stop - omega.start) / static_cast<double>(omega.count - 1);
  if (s.step > 0.25 * medium.gamma) throw ResolutionError("pair_spectrum: grid step exceeds gamma/4");
  const double reach = 5.0 * medium.gamma * (1.0 - 1e-12);
  if (omega.start > medium.omega_tilde - reach || omega.stop < medium.omega_tilde + reach) {
    throw DomainError("pair_spectrum: grid must cover omega_tilde +- 5 gamma");
  }
  s.omega.resize(omega.count);
  s.density.resize(omega.count);
  const double hw2 = 0.25 * medium.gamma * medium.gamma;
  for (std::size_t i = 0; i < omega.count; ++i) {
    s.omega[i] = omega.start + s.step * static_cast<double>(i);
    const double d = s.omega[i] - medium.omega_tilde;
    s.density[i] = 1.0 / (d * d + hw2);
  }
  const auto peak = static_cast<std::size_t>(std::max_element(s.density.begin(), s.density.end()) - s.density.begin());
  s.peak_omega = s.omega[peak];
  s.peak_density = s.density[peak];

  const double half = 0.5 * s.peak_density;
  auto crossing = [&](std::size_t inside, std::size_t outside) {
    const double f = (s.density[inside] - half) / (s.density[inside] - s.density[outside]);
    return s.omega[inside] + f * (s.omega[outside] - s.omega[inside]);
  };
  std::size_t lo = peak, hi = peak;
  while (lo > 0 && s.density[lo - 1] >= half) --lo;
  while (hi + 1 < s.density.size() && s.density[hi + 1] >= half) ++hi;
  if (lo == 0 || hi + 1 == s.density.size()) throw ResolutionError("pair_spectrum: half maximum not on grid");
  s.fwhm = crossing(hi, hi + 1) - crossing(lo, lo - 1);

  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < s.density.size(); ++i) sum += 0.5 * (s.density[i] + s.density[i + 1]);
  s.integral = sum * s.step;
  return s;
}

DelayTransform spectrum_delay_transform(const PairSpectrum& spectrum, const MediumSpec& medium,
                                        double max_delay, std::size_t points) {
  if (points < 1) throw ConfigError("spectrum transform: need at least one point");
  if (!(max_delay >= 0.0)) throw ConfigError("spectrum transform: max_delay must be >= 0");
  const std::size_t n = spectrum.density.size();
  std::vector<Complex> samples(spectrum.density.begin(), spectrum.density.end());
  const auto bins = dft(samples);
  const double bin_delay = 2.0 * units::pi / (static_cast<double>(n) * spectrum.step);
  const auto m_max = std::min(static_cast<std::size_t>(std::floor(max_delay / bin_delay)), n / 2);

  DelayTransform out;
  const double area = 2.0 * units::pi / medium.gamma;
  std::size_t last = std::numeric_limits<std::size_t>::max();
  for (std::size_t j = 0; j < points; ++j) {
    const std::size_t m =
        points == 1 ? 0
                    : static_cast<std::size_t>(std::llround(static_cast<double>(j) * static_cast<double>(m_max) /
                                                            static_cast<double>(points - 1)));
    if (m == last) continue;
    last = m;
    const double delta = static_cast<double>(m) * bin_delay;
    out.delta.push_back(delta);
    out.modulus.push_back(std::abs(bins[m]) * spectrum.step / area);
    out.model.push_back(std::exp(-0.5 * medium.gamma * delta));
    out.max_error = std::max(out.max_error, std::abs(out.modulus.back() - out.model.back()));
  }
  return out;
}

std::vector<CoincidenceEvent> sample_events(std::span<const double> rates, std::uint64_t seed,
                                            std::size_t n_events, double event_rate,
                                            const std::string& stream) {
  if (n_events == 0) throw DomainError("sample_events: n_events must be >= 1");
  if (!(event_rate > 0.0)) throw DomainError("sample_events: event_rate must be > 0");
  std::vector<double> cdf(rates.size());
  double total = 0.0;
  std::size_t last_nonzero = 0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] >= 0.0) || !std::isfinite(rates[i])) throw DomainError("sample_events: rates must be finite and >= 0");
    total += rates[i];
    cdf[i] = total;
    if (rates[i] > 0.0) last_nonzero = i;
  }
  if (!(total > 0.0)) throw DegenerateDistribution("sample_events: rate map is identically zero");

  auto rng = derive_stream(stream, seed);
  std::vector<CoincidenceEvent> events(n_events);
  double clock = 0.0;
  for (auto& e : events) {
    const double target = uniform01(rng) * total;
    auto cell = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), target) - cdf.begin());
    e.cell = std::min(cell, last_nonzero);
    clock += -std::log1p(-uniform01(rng)) / event_rate;
    e.timestamp = clock;
  }
  return events;
}

void write_csv(std::ostream& out, const DelayScan& scan) {
  CsvWriter csv(out, {"delay", "delta_t", "rate", "raw"});
  for (const auto& r : scan.records) csv.row({r.arm2.delay - r.arm1.delay, r.delta_t, r.rate, r.raw});
}

void write_csv(std::ostream& out, const PolarizationScan& scan) {
  CsvWriter csv(out, {"angle1", "angle2", "rate", "raw"});
  for (const auto& r : scan.records) csv.row({r.arm1.analyzer_angle, r.arm2.analyzer_angle, r.rate, r.raw});
}

void write_csv(std::ostream& out, const AngularMap& map) {
  CsvWriter csv(out, {"x1", "y1", "x2", "y2", "rate", "raw"});
  for (const auto& r : map.records) csv.row({r.arm1.x, r.arm1.y, r.arm2.x, r.arm2.y, r.rate, r.raw});
}

void write_csv(std::ostream& out, const PairSpectrum& spectrum) {
  CsvWriter csv(out, {"omega", "density", "normalized"});
  for (std::size_t i = 0; i < spectrum.omega.size(); ++i) {
    csv.row({spectrum.omega[i], spectrum.density[i], spectrum.density[i] / spectrum.peak_density});
  }
}

void write_csv(std::ostream& out, const DelayTransform& transform) {
  CsvWriter csv(out, {"delta", "modulus", "model"});
  for (std::size_t i = 0; i < transform.delta.size(); ++i) {
    csv.row({transform.delta[i], transform.modulus[i], transform.model[i]});
  }
}

void write_csv(std::ostream& out, const std::vector<CoincidenceEvent>& events, const AngularMap& map) {
  CsvWriter csv(out, {"index", "timestamp", "cell", "x1", "y1", "x2", "y2"});
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const auto& r = map.records.at(e.cell);
    csv.row({static_cast<double>(i), e.timestamp, static_cast<double>(e.cell), r.arm1.x, r.arm1.y, r.arm2.x,
             r.arm2.y});
  }
}

}  // namespace sas
