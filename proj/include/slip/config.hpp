#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slip/control.hpp"
#include "slip/objective.hpp"
#include "slip/pde.hpp"
#include "slip/slip.hpp"

namespace slip {

// Line-based "key = value" configuration; '#' starts a comment.
struct RunConfig {
  int grid_nx = 0;
  int grid_ny = 0;
  int state_nx = 0;
  int state_ny = 0;
  double eps = 0;
  double bx = 0;
  double by = 0;
  double peclet_limit = 1.0;
  std::vector<int> labels;
  double alpha = 0;
  double delta0 = 0;
  double sigma = 0;
  std::optional<double> delta_min;
  int max_outer = 0;
  long node_limit = 100000;
  std::uint64_t seed = 0;
  std::optional<std::string> ydata_path;
  std::optional<std::string> reference_control_path;
  std::optional<std::string> v0_path;
  std::optional<int> v0_constant;
  // Relative paths resolve against this directory.
  std::filesystem::path base_dir = ".";

  GridSpec control_grid() const { return GridSpec(grid_nx, grid_ny); }
  PdeSetup pde() const;
  SlipConfig slip() const;
  LabelSet label_set() const { return LabelSet(labels); }
};

struct ConfigParse {
  std::optional<RunConfig> config;
  std::vector<std::string> errors;  // every problem found, each naming the key and line
};

ConfigParse parse_config(std::string_view text);

// Reads and parses a file; throws ConfigError listing all errors.
RunConfig load_config(const std::filesystem::path& path);

// Normalized text of a config (all keys, defaults filled in).
std::string format_config(const RunConfig& cfg);

ScalarField load_target(const RunConfig& cfg);
Problem build_problem(const RunConfig& cfg);
ControlField initial_control(const RunConfig& cfg);

}  // namespace slip
