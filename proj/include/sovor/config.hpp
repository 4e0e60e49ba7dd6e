#pragma once
// Engine configuration: one JSON document covering the solver, control loop,
// twin and freshness knobs shared by the command-line subcommands.

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "sovor/twin.hpp"

namespace sovor {

struct EngineConfig {
  double alpha = 0.5;  // carbon weight in the environmental objective
  int hop_limit = 3;
  double cycle_minutes = 5.0;
  double delta_minutes = 30.0;  // estimator forecast horizon
  double budget_secs = 60.0;    // per-solve wall budget
  int max_twin_retries = 5;
  bool include_transport_energy = false;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  TwinThresholds twin;
  std::map<std::string, ParameterPolicy> freshness_overrides;  // by parameter key

  // Control-loop configuration assembled from these knobs.
  LoopConfig loop_config() const;
};

// Parses and validates; throws std::invalid_argument naming the bad field.
EngineConfig engine_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EngineConfig& config);
EngineConfig load_engine_config(const std::string& path);

StaleTier stale_tier_from_string(const std::string& s);

}  // namespace sovor
