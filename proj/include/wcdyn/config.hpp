#pragma once

// Declarative scenario files and the run driver behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wcdyn/criteria.hpp"

namespace wcdyn {

/// A malformed scenario file. `field` is the dotted path of the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Mode { Transitive, Disjoint, Semi };
std::string to_string(Mode m);
Mode parse_mode(const std::string& s);

struct OperatorConfig {
  std::string map;     ///< key into ScenarioConfig::maps
  std::string symbol;  ///< key into ScenarioConfig::weights
  std::int64_t power = 1;
  std::vector<Coord> offset_per_index;  ///< semi mode only; zeros when absent
};

struct ScenarioConfig {
  std::string name;
  Mode mode = Mode::Transitive;
  std::size_t dimension = 1;
  double scale = 1.0;  ///< default weight scale h
  std::map<std::string, LatticeMap> maps;
  std::map<std::string, WeightSpec> weights;
  std::string eta;  ///< key into weights
  std::vector<OperatorConfig> operators;
  NormSpec norm = NormSpec::ell_p(1.0);
  std::vector<LatticePoint> K;
  std::vector<LatticePoint> region;  ///< where K_alpha, M_w and m_w are estimated
  std::int64_t horizon = 10000;
  double tol = 1e-2;
  double epsilon = 0.1;
  std::int64_t first_index = 1;
  std::int64_t last_index = 1;
  std::string output_dir;
};

/// Unknown keys are rejected. Relative CSV table paths resolve against base_dir.
ScenarioConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
ScenarioConfig load_config(const std::filesystem::path& path);

struct Overrides {
  std::optional<std::int64_t> horizon;
  std::optional<double> tol;
  std::optional<double> epsilon;
  std::optional<Mode> mode;
  std::optional<std::string> output_dir;
};
void apply_overrides(ScenarioConfig& config, const Overrides& o);

/// Checks the mode-specific requirements and referential completeness.
void validate_config(const ScenarioConfig& config);

/// The operator objects a validated config describes.
Scenario build_scenario(const ScenarioConfig& config);
DisjointSystem build_disjoint(const ScenarioConfig& config);
FamilySystem build_family(const ScenarioConfig& config);

struct CsvFile {
  std::string name;
  std::string content;
};

inline constexpr int kExitFound = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotFound = 2;

struct RunResult {
  int exit_code = kExitError;
  nlohmann::json report;
  std::vector<CsvFile> curves;
  std::string diagnostic;  ///< set when exit_code is kExitError
};

/// Runs the configured check. Never throws for library errors; they become
/// exit code 1 with a diagnostic.
RunResult run_scenario(const ScenarioConfig& config);

/// Writes <dir>/<name>.json and every curve file; returns the written paths.
std::vector<std::filesystem::path> write_outputs(const RunResult& result, const std::string& name,
                                                 const std::filesystem::path& dir);

}  // namespace wcdyn
