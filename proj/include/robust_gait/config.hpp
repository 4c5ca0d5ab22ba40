#pragma once

#include "robust_gait/bo.hpp"
#include "robust_gait/errors.hpp"
#include "robust_gait/plant.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace robust_gait::harness
{

/// Malformed or out-of-range configuration.
class ConfigError : public InvalidParameter
{
public:
  using InvalidParameter::InvalidParameter;
};

struct TunerSettings
{
  bo::OuterCostParams cost;
  int budget = 50;
  int init_points = 5;
  std::uint64_t seed = 7;
};

/// Everything a run depends on. Parsed from flat `section.key=value` text;
/// every field has a default so an empty file is a complete configuration.
struct ExperimentConfig
{
  plant::SimConfig sim;
  std::map<char, plant::DisturbanceScenario> scenarios; // labels a..d
  TunerSettings tuner;
  bo::WeightBounds bounds;
  std::string output_dir = "out";

  const plant::DisturbanceScenario & scenario(char label) const;
  bo::TuneOptions tune_options() const;
  void validate() const;
};

ExperimentConfig default_config();

/// Strict parser: unknown keys, duplicate keys, lines without '=' and
/// malformed numbers are rejected with the offending line number.
ExperimentConfig parse_config_text(const std::string & text, const std::string & origin = "<text>");
ExperimentConfig parse_config(const std::string & path);

/// Writes every key, defaults included. parse(serialize(c)) reproduces c exactly.
std::string serialize(const ExperimentConfig & config);

} // namespace robust_gait::harness
