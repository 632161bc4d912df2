// sasim: scenario runner and self-check for the Stokes/anti-Stokes pair model.

#include "sas/errors.hpp"
#include "sas/scenario.hpp"
#include "sas/self_check.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

constexpr const char* version_string = "sasim 0.1.0";

constexpr int exit_ok = 0;
constexpr int exit_validation = 1;
constexpr int exit_config = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlated Stokes/anti-Stokes photon-pair simulator"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  auto* run = app.add_subcommand("run", "Run a scenario file and write CSV/JSON artifacts");
  run->add_option("file", scenario_path, "Scenario file (JSON)")->required();
  auto* out_opt = run->add_option("--out-dir", out_dir, "Output directory (overrides output_dir)");
  auto* seed_opt = run->add_option("--seed", seed, "Seed override");
  run->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  bool check_json = false;
  std::vector<int> only;
  unsigned check_threads = 1;
  auto* check = app.add_subcommand("check", "Run the acceptance self-check");
  check->add_flag("--json", check_json, "Print the machine-readable report");
  check->add_option("--only", only, "Run only these criterion ids")->check(CLI::Range(1, sas::criterion_count));
  check->add_option("--threads", check_threads, "Worker threads")->check(CLI::Range(1u, 1024u));

  app.add_subcommand("schema", "Print the scenario JSON schema");
  app.add_subcommand("version", "Print the version");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_config;
  }

  if (app.got_subcommand("version")) {
    std::cout << version_string << "\n";
    return exit_ok;
  }
  if (app.got_subcommand("schema")) {
    std::cout << sas::schema_text();
    return exit_ok;
  }
  if (app.got_subcommand("check")) {
    sas::SelfCheckOptions options;
    options.only = only;
    options.threads = check_threads;
    const auto report = sas::run_self_check(options);
    std::cout << (check_json ? report.to_json() : report.to_text());
    return report.all_passed() ? exit_ok : exit_validation;
  }

  try {
    const auto scenario = sas::parse_scenario_file(scenario_path);
    for (const auto& w : scenario.warnings) std::cerr << "warning: " << w << "\n";
    sas::RunOptions options;
    if (*out_opt) options.out_dir = out_dir;
    if (*seed_opt) options.seed = seed;
    options.threads = threads;
    options.log = &std::cerr;
    const auto result = sas::run_scenario(scenario, options);
    for (const auto& f : result.failures) std::cerr << "validation failed: " << f << "\n";
    return result.exit_code == 0 ? exit_ok : exit_validation;
  } catch (const sas::ConfigError& e) {
    std::cerr << "config error:\n" << e.what() << "\n";
    return exit_config;
  } catch (const sas::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  }
}
