#include "sas/scenario.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace sas;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sas_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::map<std::string, std::string> read_all(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    out[entry.path().filename().string()] = text.str();
  }
  return out;
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

const char* delay_only = R"({
  "id": "delay-only",
  "seed": 3,
  "scans": [ { "id": "delay", "kind": "delay", "delay": { "start": 0, "stop": 10, "count": 11 } } ]
})";

}  // namespace

TEST_CASE("minimal scenario takes the documented defaults") {
  const auto sc = parse_scenario_text(R"({"id": "minimal"})");
  CHECK(sc.id == "minimal");
  CHECK(sc.seed == 0);
  CHECK(sc.sigma_acc == 0.01);
  CHECK(sc.J == 401);
  CHECK(sc.bandwidth == doctest::Approx(40.0 * sc.medium.gamma));
  CHECK(sc.V_Q == doctest::Approx(1e3 * sc.medium.V_S));
  CHECK(sc.medium.omega_tilde == doctest::Approx(units::wavenumber_to_omega(1332.0)).epsilon(1e-6));
  CHECK(sc.validations.vacuum);
  CHECK_FALSE(sc.validations.decay_oracle);
  CHECK(sc.scans.empty());
  CHECK(sc.warnings.empty());
  CHECK_NOTHROW(sc.laser.validate());
}

TEST_CASE("the shipped reference scenario parses cleanly") {
  const auto sc = parse_scenario_file(SAS_REFERENCE_SCENARIO);
  CHECK(sc.id == "reference");
  CHECK(sc.scans.size() == 4);
  CHECK(sc.warnings.empty());
  CHECK(parse_scenario_text(reference_scenario_text()).scans.size() == 4);
  CHECK(nlohmann::json::parse(schema_text()).contains("properties"));
}

TEST_CASE("broad line emits a warning but parses") {
  const auto sc = parse_scenario_text(R"({"id": "broad", "medium": {"omega_tilde": 100, "gamma": 50}})");
  REQUIRE_FALSE(sc.warnings.empty());
  bool mentions_medium = false;
  for (const auto& w : sc.warnings) mentions_medium = mentions_medium || w.rfind("/medium", 0) == 0;
  CHECK(mentions_medium);
}

TEST_CASE("errors name the exact JSON path") {
  const std::string e1 = error_of(R"({"medium": {"gamma": "fast"}})");
  CHECK(e1.find("/medium/gamma") != std::string::npos);

  const std::string e2 = error_of(R"({"scans": [{"id": "d", "kind": "delay", "delay": {"start": 0, "stop": 1, "cuont": 5}}]})");
  CHECK(e2.find("/scans/0/delay/cuont") != std::string::npos);

  const std::string e3 = error_of(R"({"laser": {"mode1": {"direction": [0, 0, 1], "polarization": [0, 0, 1]}}})");
  CHECK(e3.find("/laser/mode1/polarization") != std::string::npos);

  // Every problem is reported, not just the first.
  const std::string e4 = error_of(R"({"bogus": 1, "sigma_acc": -1, "reservoir": {"J": 100}})");
  CHECK(e4.find("/bogus") != std::string::npos);
  CHECK(e4.find("/sigma_acc") != std::string::npos);
  CHECK(e4.find("/reservoir/J") != std::string::npos);

  CHECK(error_of("{ not json").find("malformed JSON") != std::string::npos);
  CHECK_FALSE(error_of(R"({"scans": [{"id": "a", "kind": "delay"}, {"id": "a", "kind": "spectrum"}]})").empty());
  CHECK_FALSE(error_of(R"({"scans": [{"id": "validation", "kind": "delay"}]})").empty());
  CHECK_FALSE(error_of(R"({"scans": [{"id": "../x", "kind": "delay"}]})").empty());
  CHECK_FALSE(error_of(R"({"scans": [{"id": "w", "kind": "wiggle"}]})").empty());
  CHECK_FALSE(error_of(R"({"laser": {"omega": 100}})").empty());
  CHECK_THROWS_AS(parse_scenario_file("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("complex polarization input") {
  const auto sc = parse_scenario_text(R"({"laser": {
      "mode1": {"direction": [0, 0, 1], "polarization": {"re": [1, 0, 0], "im": [0, 1, 0]}},
      "mode2": {"direction": [0, 0, 1], "polarization": [0, 2, 0]}}})");
  CHECK(std::abs(sc.laser.mode1.polarization[1] - Complex(0.0, 1.0 / std::sqrt(2.0))) < 1e-15);
  CHECK(std::abs(sc.laser.mode2.polarization[1] - Complex(1.0, 0.0)) < 1e-15);
}

TEST_CASE("a delay-only scenario writes exactly its CSV and summary") {
  const auto dir = fresh_dir("delay_only");
  const auto sc = parse_scenario_text(delay_only);
  RunOptions opts;
  opts.out_dir = dir;
  const auto result = run_scenario(sc, opts);
  CHECK(result.exit_code == 0);
  CHECK(result.failures.empty());
  const auto files = read_all(dir);
  REQUIRE(files.size() == 2);
  REQUIRE(files.count("delay.csv") == 1);
  REQUIRE(files.count("delay.json") == 1);
  CHECK(files.at("delay.csv").rfind("delay,delta_t,rate,raw\n", 0) == 0);
  const auto summary = nlohmann::json::parse(files.at("delay.json"));
  CHECK(summary.at("gamma_fit").get<double>() == doctest::Approx(sc.medium.gamma).epsilon(1e-10));
}

TEST_CASE("identical runs produce identical bytes") {
  const auto a = fresh_dir("det_a");
  const auto b = fresh_dir("det_b");
  const auto sc = parse_scenario_file(SAS_REFERENCE_SCENARIO);
  RunOptions oa;
  oa.out_dir = a;
  oa.threads = 1;
  RunOptions ob;
  ob.out_dir = b;
  ob.threads = 3;
  CHECK(run_scenario(sc, oa).exit_code == 0);
  CHECK(run_scenario(sc, ob).exit_code == 0);
  const auto fa = read_all(a);
  const auto fb = read_all(b);
  CHECK(fa.size() >= 8);
  CHECK(fa == fb);

  // A different seed changes the sampled outputs only.
  const auto c = fresh_dir("det_c");
  RunOptions oc;
  oc.out_dir = c;
  oc.seed = 99;
  run_scenario(sc, oc);
  const auto fc = read_all(c);
  CHECK(fc.at("delay.csv") == fa.at("delay.csv"));
  CHECK(fc.at("angular_events.csv") != fa.at("angular_events.csv"));
}

TEST_CASE("a warm medium fails the vacuum gate") {
  const auto dir = fresh_dir("hot");
  const auto sc = parse_scenario_text(R"({"id": "hot", "medium": {"T": 3000},
      "scans": [{"id": "delay", "kind": "delay"}]})");
  RunOptions opts;
  opts.out_dir = dir;
  const auto result = run_scenario(sc, opts);
  CHECK(result.exit_code == 1);
  REQUIRE_FALSE(result.failures.empty());
  const auto files = read_all(dir);
  CHECK(files.count("delay.csv") == 0);
  REQUIRE(files.count("validation.json") == 1);
  const auto report = nlohmann::json::parse(files.at("validation.json"));
  CHECK(report.dump().find("thermal") != std::string::npos);
}

TEST_CASE("requested validations are written") {
  const auto dir = fresh_dir("validations");
  const auto sc = parse_scenario_text(R"({"id": "v", "validations":
      {"decay_oracle": true, "commutator": true, "exchange_quadrature": true, "reservoir": true}})");
  RunOptions opts;
  opts.out_dir = dir;
  const auto result = run_scenario(sc, opts);
  const auto files = read_all(dir);
  CHECK(files.count("decay_oracle.csv") == 1);
  CHECK(files.count("reservoir.csv") == 1);
  REQUIRE(files.count("validation.json") == 1);
  // The commutator and quadrature checks report their measured values even
  // when they miss their tolerances.
  const auto report = nlohmann::json::parse(files.at("validation.json"));
  CHECK(report.dump().find("commutator") != std::string::npos);
  CHECK(report.dump().find("exchange") != std::string::npos);
  CHECK((result.exit_code == 0) == result.failures.empty());
}

TEST_CASE("unwritable output directory is an I/O error") {
  const auto dir = fresh_dir("blocked");
  const fs::path file = dir / "not_a_dir";
  std::ofstream(file) << "x";
  auto sc = parse_scenario_text(delay_only);
  RunOptions opts;
  opts.out_dir = file / "sub";
  CHECK_THROWS_AS(run_scenario(sc, opts), IoError);
}
