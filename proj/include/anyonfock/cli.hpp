#ifndef ANYONFOCK_CLI_HPP
#define ANYONFOCK_CLI_HPP

// Experiment configuration, verification suites and reports.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "anyonfock/qcore.hpp"

namespace anyonfock {

inline constexpr const char* kToolVersion = "1.0.0";

/// Invalid configuration; the message starts with the failing field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& problem)
      : std::invalid_argument(field + ": " + problem), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GridSpec {
  std::size_t cells = 4;
  std::size_t fiber_dim = 1;
  double total_mass = 1.0;
  std::vector<double> coords;   // optional, defaults to 1..cells
  std::vector<double> weights;  // optional, defaults to total_mass / cells

  Grid build() const;
};

struct KernelSpec {
  long num = 1;
  long den = 3;
  std::optional<double> eta;

  QKernel build() const;
};

struct ExperimentConfig {
  std::string suite = "all";
  std::uint64_t seed = 20240611;
  std::string out_dir = "anyonfock-out";
  std::string format = "json";
  bool parallel = false;
  bool timings = false;

  GridSpec grid;
  KernelSpec kernel;
  std::size_t max_level = 4;
  std::size_t entry_cap = 10'000'000;

  double model_eta = 0.5;
  double model_kappa = 1.0;
  /// Optional fiber block of T, row-major; must be square.
  std::vector<std::vector<double>> t_block;

  std::size_t samples = 1'000'000;
  unsigned threads = 1;
  std::size_t random_cases = 10;
  std::vector<double> kappas = {10.0, 100.0, 1000.0};
};

/// Suite names accepted by run_suite.
const std::vector<std::string>& suite_names();

/// INI text with sections run, grid, kernel, fock, model, sampling, checks.
ExperimentConfig parse_config_string(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Throws ConfigError naming the first invalid field.
void validate(const ExperimentConfig& config);

nlohmann::json config_to_json(const ExperimentConfig& config);

// ---------------------------------------------------------------------------

/// How computed is compared with expected:
///   abs   |computed - expected| <= tolerance
///   rel   |computed - expected| <= tolerance * |expected|
///   upper computed <= expected + tolerance
///   lower computed >= expected - tolerance
enum class CheckMode { abs, rel, upper, lower };

std::string to_string(CheckMode mode);
CheckMode parse_check_mode(const std::string& name);
bool evaluate_check(CheckMode mode, double computed, double expected,
                    double tolerance);

struct CheckRecord {
  std::string suite;
  std::string name;
  double computed = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  CheckMode mode = CheckMode::abs;
  bool passed = false;
  double runtime = 0.0;  // seconds
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Report {
  std::string suite;
  std::vector<CheckRecord> records;
  std::vector<Table> tables;
  nlohmann::json config;
  std::string version = kToolVersion;

  bool passed() const;
  void append(const Report& other);
};

/// Runs the configured suite.  Throws ConfigError, ResourceError.
Report run_suite(const ExperimentConfig& config);

nlohmann::json report_to_json(const Report& report, bool timings);
Report report_from_json(const nlohmann::json& j);

/// Deterministic JSON text: sorted keys, doubles printed with 17 significant
/// digits, two-space indentation.
std::string dump_json(const nlohmann::json& j);

/// Writes report.json or report.csv plus one <table>.csv per table into
/// out_dir and returns the written paths.
std::vector<std::string> emit_tables(const Report& report,
                                     const std::string& format,
                                     const std::string& out_dir, bool timings);

/// Re-evaluates every record of a report; returns the number of records
/// whose stored verdict disagrees with the recomputed one.
std::size_t reverify(const Report& report);

/// %.17g
std::string format_double(double v);

}  // namespace anyonfock

#endif  // ANYONFOCK_CLI_HPP
