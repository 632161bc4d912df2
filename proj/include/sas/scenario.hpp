#pragma once

// Scenario files: strict JSON parsing with path-qualified diagnostics, and
// the orchestration that turns a scenario into CSV/JSON artifacts.

#include "sas/observables.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sas {

enum class ScanKind { delay, polarization, angular, spectrum };

const char* to_string(ScanKind kind);
const char* to_string(Channel channel);

struct SpectrumScanConfig {
  std::size_t points = 4096;
  double step_over_gamma = 0.125;
  std::size_t transform_points = 0;  // 0: no delay transform output
  double max_delay_over_gamma = 5.0;
};

struct ScanConfig {
  std::string id;
  ScanKind kind = ScanKind::delay;
  std::optional<double> beam_spread;  // overrides the laser value
  std::optional<double> sigma_acc;    // overrides the scenario value
  std::optional<std::uint64_t> seed;  // overrides the scenario seed

  DelayScanConfig delay;
  PolarizationScanConfig polarization;
  AngularMapConfig angular;
  SpectrumScanConfig spectrum;
  std::size_t events = 0;  // events sampled from an angular map
  double event_rate = 1e-6;
};

struct Validations {
  bool vacuum = true;  // thermal gate; always evaluated
  bool decay_oracle = false;
  bool commutator = false;
  bool exchange_quadrature = false;
  bool reservoir = false;
};

struct Scenario {
  std::string id = "scenario";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = ".";
  MediumSpec medium;
  LaserPair laser;
  std::size_t J = 401;
  double bandwidth = 0.0;  // [rad/ps]; 40 gamma unless given
  double V_Q = 0.0;        // 1e3 V_S unless given
  double sigma_acc = 0.01;
  std::vector<ScanConfig> scans;
  Validations validations;
  std::vector<std::string> warnings;
};

/// Throws ConfigError listing every violation as "<json pointer>: message".
Scenario parse_scenario_text(std::string_view text);
Scenario parse_scenario_file(const std::filesystem::path& path);

/// JSON Schema (draft 2020-12) of the scenario format.
std::string schema_text();

/// Scenario shipped as scenarios/reference.json.
std::string reference_scenario_text();

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::ostream* log = nullptr;
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 1 validation failure
  std::vector<std::filesystem::path> files;
  std::vector<std::string> failures;
};

/// Runs every scan and requested validation, writing `<scan id>.csv` and
/// `<scan id>.json` per scan (plus `validation.json` when validations ran).
/// Output bytes depend only on the scenario and seed.
RunResult run_scenario(const Scenario& scenario, const RunOptions& options = {});

}  // namespace sas
