#include "sovor/config.hpp"

#include <fstream>
#include <stdexcept>

namespace sovor {

StaleTier stale_tier_from_string(const std::string& s) {
  if (s == "ForecastSubstitute") return StaleTier::ForecastSubstitute;
  if (s == "ConservativeBound") return StaleTier::ConservativeBound;
  if (s == "Hold") return StaleTier::Hold;
  throw std::invalid_argument("unknown staleness tier '" + s + "'");
}

LoopConfig EngineConfig::loop_config() const {
  LoopConfig lc;
  lc.build.alpha = alpha;
  lc.build.hop_limit = hop_limit;
  lc.build.include_transport_energy = include_transport_energy;
  lc.cycle_s = cycle_minutes * 60.0;
  lc.delta_minutes = delta_minutes;
  lc.solver_budget_s = budget_secs;
  lc.max_twin_retries = max_twin_retries;
  lc.twin = twin;
  lc.freshness = FreshnessPolicy::defaults(lc.cycle_s);
  for (const auto& [param, policy] : freshness_overrides)
    lc.freshness.overrides[param] = policy;
  return lc;
}

EngineConfig engine_config_from_json(const nlohmann::json& j) {
  EngineConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.hop_limit = j.value("hop_limit", c.hop_limit);
  c.cycle_minutes = j.value("cycle_minutes", c.cycle_minutes);
  c.delta_minutes = j.value("delta_minutes", c.delta_minutes);
  c.budget_secs = j.value("budget_secs", c.budget_secs);
  c.max_twin_retries = j.value("max_twin_retries", c.max_twin_retries);
  c.include_transport_energy = j.value("include_transport_energy", c.include_transport_energy);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (j.contains("twin")) {
    const auto& t = j.at("twin");
    c.twin.congestion_threshold = t.value("congestion_threshold", c.twin.congestion_threshold);
    c.twin.ambient_derating = t.value("ambient_derating", c.twin.ambient_derating);
  }
  if (j.contains("freshness_overrides"))
    for (const auto& [param, p] : j.at("freshness_overrides").items()) {
      ParameterPolicy policy;
      policy.tau_max_s = p.value("tau_max_s", policy.tau_max_s);
      policy.tier = stale_tier_from_string(p.value("tier", "ForecastSubstitute"));
      if (!(policy.tau_max_s > 0.0))
        throw std::invalid_argument("freshness_overrides." + param + ".tau_max_s must be > 0");
      c.freshness_overrides[param] = policy;
    }

  if (!(c.alpha >= 0.0 && c.alpha <= 1.0))
    throw std::invalid_argument("alpha must be in [0, 1]");
  if (c.hop_limit < 1) throw std::invalid_argument("hop_limit must be >= 1");
  if (!(c.cycle_minutes > 0.0)) throw std::invalid_argument("cycle_minutes must be > 0");
  if (!(c.delta_minutes > 0.0)) throw std::invalid_argument("delta_minutes must be > 0");
  if (!(c.budget_secs >= 0.0)) throw std::invalid_argument("budget_secs must be >= 0");
  if (c.max_twin_retries < 0) throw std::invalid_argument("max_twin_retries must be >= 0");
  if (!(c.twin.congestion_threshold > 0.0 && c.twin.congestion_threshold <= 1.0))
    throw std::invalid_argument("twin.congestion_threshold must be in (0, 1]");
  if (!(c.twin.ambient_derating > 0.0))
    throw std::invalid_argument("twin.ambient_derating must be > 0");
  if (c.seeds.empty()) throw std::invalid_argument("seeds must not be empty");
  return c;
}

nlohmann::json to_json(const EngineConfig& config) {
  nlohmann::json overrides = nlohmann::json::object();
  for (const auto& [param, p] : config.freshness_overrides)
    overrides[param] = {{"tau_max_s", p.tau_max_s}, {"tier", to_string(p.tier)}};
  return nlohmann::json{{"alpha", config.alpha},
                        {"hop_limit", config.hop_limit},
                        {"cycle_minutes", config.cycle_minutes},
                        {"delta_minutes", config.delta_minutes},
                        {"budget_secs", config.budget_secs},
                        {"max_twin_retries", config.max_twin_retries},
                        {"include_transport_energy", config.include_transport_energy},
                        {"seeds", config.seeds},
                        {"twin",
                         {{"congestion_threshold", config.twin.congestion_threshold},
                          {"ambient_derating", config.twin.ambient_derating}}},
                        {"freshness_overrides", overrides}};
}

EngineConfig load_engine_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  return engine_config_from_json(j);
}

}  // namespace sovor
