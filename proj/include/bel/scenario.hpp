#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bel/check.hpp"
#include "json.hpp"

namespace bel {

/// One `key = value` line of a scenario file.
struct ConfigEntry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Flat key = value configuration, one scenario per file; entries keep file order.
struct ScenarioConfig {
  std::vector<ConfigEntry> entries;

  const ConfigEntry* find(std::string_view key) const;
  std::string scenario() const;
  /// Adds or replaces a key.
  void set(const std::string& key, const std::string& value);
};

/// Parses `key = value` lines; `#` starts a comment. Throws config-parse-error
/// (with the line number) on malformed lines and duplicate keys.
ScenarioConfig parse_config(std::string_view text);
/// Reads and parses a file; io-error when it cannot be read.
ScenarioConfig load_config(const std::filesystem::path& path);

/// Comma lists expand to the cartesian product of runs, in file order with the
/// last swept key varying fastest.
std::vector<ScenarioConfig> expand_sweeps(const ScenarioConfig& config);

struct ScenarioInfo {
  std::string name;
  std::string summary;
  std::vector<std::string> required;
  std::vector<std::string> optional;
};

/// Every scenario also accepts grid.r_max, grid.nodes, grid.spacing, tol and out_dir.
const std::vector<ScenarioInfo>& scenario_catalog();

/// Throws config-parse-error for unknown scenarios, unknown or missing keys and
/// unparsable values. Comma lists must be expanded first.
void validate_config(const ScenarioConfig& config);

struct ProfileColumn {
  std::string name;
  std::vector<double> values;
};

/// Shortest form that round-trips at 17 significant digits.
std::string format_double(double x);

/// CSV with a header row and one LF-terminated row per node. Columns without
/// values are omitted; the rest must have equal length. Throws io-error.
void emit_profiles(const std::vector<ProfileColumn>& columns, const std::filesystem::path& path);

struct RunReport {
  std::string scenario;
  nlohmann::ordered_json config;
  std::vector<Check> checks;
  nlohmann::ordered_json details = nlohmann::ordered_json::object();
  double seconds = 0.0;

  bool passed() const { return all_pass(checks); }
  /// Schema 1 document; the timings block comes last and is the only
  /// run-dependent part.
  nlohmann::ordered_json to_json(bool with_timings = true) const;
};

/// Runs one validated, expanded config and writes profiles.csv and report.json
/// into out_dir. Library errors raised by the scenario become failed checks.
RunReport run_scenario(const ScenarioConfig& config, const std::filesystem::path& out_dir);

struct RunOptions {
  std::optional<std::filesystem::path> out;
  std::optional<double> tol;
  int jobs = 1;
};

/// Exit codes: 0 all checks pass, 1 some check failed, 2 configuration or output error.
inline constexpr int exit_pass = 0;
inline constexpr int exit_check_failure = 1;
inline constexpr int exit_config_error = 2;

/// Load, expand and run. Output directory precedence: opts.out, the config's
/// out_dir, then BEL_OUT_DIR. Sweeps write into run-NNN subdirectories.
int run_config_file(const std::filesystem::path& path, const RunOptions& opts, std::ostream& log);

}  // namespace bel
