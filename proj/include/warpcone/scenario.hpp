#pragma once

// Declarative scenario configs and the statistic runner behind the CLI.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "warpcone/action.hpp"
#include "warpcone/manifold.hpp"

namespace warpcone {

inline constexpr const char* kStatistics[] = {"distances", "diameter", "capacity", "witness", "kernels", "spectra"};

struct ScenarioConfig {
  std::string name = "custom";
  SpaceSpec space;
  nlohmann::json action;  // {"name": ..., parameters...}
  std::vector<double> levels;
  double mesh_base = 0.1;
  std::optional<double> mesh;  // fixed mesh instead of the h0 / t schedule
  double radius_factor = 3.0;
  std::vector<std::string> statistics;
  std::size_t folner_n = 32;
  std::vector<double> scales{2.0};
  std::uint64_t seed = 0;

  std::size_t distance_pairs = 2000;  // sampled pairs above 512 nodes
  double capacity_r = 3.0;
  double capacity_eps = 1.0;
  std::size_t capacity_centers = 10;
  double witness_window = 10.0;
  double kernel_window = 0.4;
  std::size_t kernel_nodes = 256;
  std::size_t kernel_word_length = 2;
  std::optional<double> spectra_mesh_base;  // resolution used for spectra only
  double spectra_tol = 0.0;
  std::size_t max_nodes = 8'000'000;
};

/// Parses and validates a config object. A "base" key names a canned
/// scenario whose values are overridden by the remaining keys.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config_file(const std::filesystem::path& path);
/// Canned scenarios: trivial-circle, cyclic8, transitive5,
/// irrational-rotation, cat-map, free-so3.
ScenarioConfig canned_config(const std::string& name);
std::vector<std::string> canned_names();
/// Directory holding the canned configs (WARPCONE_SCENARIOS overrides).
std::filesystem::path scenario_dir();

nlohmann::json to_json(const ScenarioConfig& config);
GroupAction make_action(const ScenarioConfig& config);

struct Report {
  nlohmann::json summary;
  /// file name -> CSV body
  std::map<std::string, std::string> tables;
};

struct RunOptions {
  bool record_runtimes = true;
};

/// Runs every statistic in config.statistics at every level.
Report run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

/// Writes report.json and the CSV tables into `dir` (created if needed).
void write_report(const Report& report, const std::filesystem::path& dir);

/// WARPCONE_OUT or the current directory.
std::filesystem::path output_dir();

std::string version();

}  // namespace warpcone
