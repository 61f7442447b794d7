#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "anyonfock/cli.hpp"

namespace {

using anyonfock::ConfigError;
using anyonfock::ExperimentConfig;

// Exit codes: 0 all checks passed, 1 a check failed, 2 invalid input,
// 3 resource or I/O failure.
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

std::uint64_t parse_seed(const std::string& field, const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument(text);
    v = std::stoull(text, &pos, 10);
  } catch (const std::exception&) {
    throw ConfigError(field, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
  if (pos != text.size()) {
    throw ConfigError(field, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
  return v;
}

void print_summary(const anyonfock::Report& report) {
  std::size_t passed = 0;
  for (const auto& r : report.records) {
    if (r.passed) {
      ++passed;
    } else {
      std::cout << "FAIL " << r.suite << "/" << r.name << ": computed "
                << anyonfock::format_double(r.computed) << ", expected "
                << anyonfock::format_double(r.expected) << " (" << to_string(r.mode)
                << ", tol " << anyonfock::format_double(r.tolerance) << ")\n";
    }
  }
  std::cout << "suite " << report.suite << ": " << passed << "/" << report.records.size()
            << " checks passed\n";
}

int run_command(const std::string& suite, const std::string& config_path,
                const std::optional<std::string>& seed_flag,
                const std::optional<std::string>& out_flag,
                const std::optional<std::string>& format_flag, bool parallel, bool timings) {
  ExperimentConfig config;
  if (!config_path.empty()) config = anyonfock::parse_config_file(config_path);
  config.suite = suite;
  if (const char* env = std::getenv("ANYONFOCK_SEED"); env && *env) {
    config.seed = parse_seed("ANYONFOCK_SEED", env);
  }
  if (seed_flag) config.seed = parse_seed("--seed", *seed_flag);
  if (out_flag) config.out_dir = *out_flag;
  if (format_flag) config.format = *format_flag;
  if (parallel) config.parallel = true;
  if (timings) config.timings = true;
  anyonfock::validate(config);

  const anyonfock::Report report = anyonfock::run_suite(config);
  const auto files = anyonfock::emit_tables(report, config.format, config.out_dir, config.timings);
  print_summary(report);
  for (const auto& f : files) std::cout << "wrote " << f << "\n";
  return report.passed() ? 0 : kExitFail;
}

int report_command(const std::string& path) {
  std::filesystem::path p(path);
  if (std::filesystem::is_directory(p)) p /= "report.json";
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(p.string(), std::string("malformed report: ") + e.what());
  }
  anyonfock::Report report;
  try {
    report = anyonfock::report_from_json(j);
  } catch (const std::exception& e) {
    throw ConfigError(p.string(), std::string("malformed report: ") + e.what());
  }
  print_summary(report);
  const std::size_t mismatches = anyonfock::reverify(report);
  if (mismatches) {
    std::cout << mismatches << " record(s) disagree with their stored verdict\n";
    return kExitFail;
  }
  if (j.value("passed", !report.passed()) != report.passed()) {
    std::cout << "stored suite verdict disagrees with its records\n";
    return kExitFail;
  }
  return report.passed() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anyon Fock space verification runner"};
  app.set_version_flag("--version", std::string(anyonfock::kToolVersion));
  app.require_subcommand(1);

  std::string suite;
  std::string config_path;
  std::optional<std::string> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
  bool parallel = false;
  bool timings = false;

  auto* run = app.add_subcommand("run", "Run a verification suite and write its report");
  run->add_option("suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember(anyonfock::suite_names()));
  run->add_option("--config", config_path, "INI config file")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Master seed (overrides config and ANYONFOCK_SEED)");
  run->add_option("--out", out, "Output directory");
  run->add_option("--format", format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  run->add_flag("--parallel", parallel, "Run independent suites concurrently");
  run->add_flag("--timings", timings, "Include per-check runtimes in the report");

  std::string report_path;
  auto* report = app.add_subcommand("report", "Re-read a report and re-check its verdicts");
  report->add_option("path", report_path, "report.json or the directory holding it")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return run_command(suite, config_path, seed, out, format, parallel, timings);
    return report_command(report_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const anyonfock::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
