#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpe_optctl/grape.hpp"
#include "gpe_optctl/krotov.hpp"
#include "gpe_optctl/problem.hpp"

namespace gpe_optctl {

enum class OptimizerKind { grape, krotov, hybrid };

std::string to_string(OptimizerKind kind);

struct OutputOptions {
  /// Every density_stride-th time node goes into density.bin.
  std::size_t density_stride = 10;
  int snapshot_every = 1;
};

struct ExperimentConfig {
  ProblemSpec problem;
  OptimizerKind optimizer = OptimizerKind::grape;
  GrapeConfig grape;
  KrotovConfig krotov;
  long switch_after = 50;
  OutputOptions output;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Defaults for a preset problem, including the preset's Krotov step size.
ExperimentConfig default_config(const std::string& preset);

nlohmann::json to_json(const ExperimentConfig& config);

/// Reads a config object on top of the defaults of its problem.preset (default "splitting").
/// Unknown keys and invalid values raise ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& raw);

/// Applies "a.b.c=value" to a raw config object. The value is parsed as JSON when possible and
/// taken as a string otherwise.
void apply_override(nlohmann::json& raw, const std::string& assignment);

nlohmann::json load_json_file(const std::filesystem::path& path);

/// load_json_file + overrides + config_from_json.
ExperimentConfig resolve_config(const nlohmann::json& raw, const std::vector<std::string>& overrides);

struct SweepRun {
  std::string name;
  std::vector<std::string> assignments;
  ExperimentConfig config;
};

/// A sweep file holds {"base": <config>, "grid": {"dotted.key": [values, ...], ...}}. Runs are
/// the cross product of the grid values (keys in sorted order) applied to the base config.
/// Command-line overrides apply to every run before the grid values.
std::vector<SweepRun> expand_sweep(const nlohmann::json& sweep, const std::vector<std::string>& overrides);

}  // namespace gpe_optctl
