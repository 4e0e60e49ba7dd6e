#pragma once
// Synthetic telemetry and the ingestion pipeline.
//
// generate_stream renders a deterministic, time-ordered reading stream from a
// profile spec: diurnal carbon sinusoids with noise, stress-windowed water
// intensity and permits, power caps on a bounded random walk, and per-link
// utilization noise. ingest aligns the stream to a cycle timestamp and
// enforces freshness: a fresh reading is used as-is, a mildly stale one is
// forward-held, and one past its maximum age degrades by its policy tier -
// forecast substitution, a conservative bound over the trailing hour, or an
// optimization hold that makes the control loop skip the cycle. estimate
// smooths slowly varying parameters and appends short-horizon forecasts.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "sovor/domain.hpp"

namespace sovor {

enum class StreamDomain { Power, Carbon, Water, Network, Workload };

const char* to_string(StreamDomain d);
StreamDomain stream_domain_from_string(const std::string& s);

struct RawReading {
  StreamDomain domain = StreamDomain::Power;
  std::string parameter;  // "site/<id>/<field>" or "link/<from>-><to>/<field>"
  double value = 0.0;
  double timestamp_s = 0.0;
  std::string source;

  bool operator==(const RawReading&) const = default;
};

enum class StaleTier { ForecastSubstitute, ConservativeBound, Hold };

const char* to_string(StaleTier t);

struct ParameterPolicy {
  double tau_max_s = 900.0;  // readings older than this degrade by tier
  StaleTier tier = StaleTier::ForecastSubstitute;
};

// Tier lookup: exact parameter-key overrides win, then per-field defaults.
// Carbon and water intensities and link delays substitute from forecast;
// capacity-like fields (power_cap, capacity, permits, on-site generation)
// bound conservatively with the minimum over the trailing hour, utilization
// with the maximum; alarm state cannot be substituted and forces a hold.
struct FreshnessPolicy {
  double cycle_s = 300.0;  // readings at most this old are Fresh
  std::map<std::string, ParameterPolicy> overrides;
  std::map<std::string, ParameterPolicy> field_defaults;

  static FreshnessPolicy defaults(double cycle_s = 300.0);
  ParameterPolicy policy_for(const std::string& parameter) const;
};

// Deterministic standard normal over a seeded engine (Box-Muller), so
// generated streams are identical across standard libraries.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : eng_(seed) {}
  double uniform();  // in (0, 1)
  double next();     // standard normal

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct CarbonProfile {
  double mean = 0.0;       // g/kWh
  double amplitude = 0.0;  // diurnal swing around the mean
  double phase_rad = 0.0;
  double noise_sd = 0.0;
};

// Half-open stress interval scaling a site's water figures.
struct StressWindow {
  double begin_s = 0.0, end_s = 0.0;
  double water_intensity_factor = 1.0;
  double water_permit_factor = 1.0;

  bool active(double t) const { return t >= begin_s && t < end_s; }
};

// Suppresses emission of one parameter inside [begin, end); the generator
// still draws its noise so other streams are unaffected.
struct Dropout {
  std::string parameter;
  double begin_s = 0.0, end_s = 0.0;
};

struct StreamSpec {
  double cycle_s = 300.0;
  std::map<SiteId, CarbonProfile> carbon;   // absent site: constant base value
  std::map<SiteId, double> water_noise_sd;  // additive, on water intensity
  std::map<SiteId, StressWindow> stress;
  std::map<SiteId, double> power_walk_sd;          // kW step per cycle
  std::map<std::string, double> utilization_noise_sd;  // keyed "from->to"
  std::vector<Dropout> dropouts;
  double power_floor_frac = 0.7;  // walk reflects inside [frac*cap, cap]
};

// Readings for every dynamic site and link parameter at each cycle timestamp
// in [0, horizon_s], time-ordered, deterministic per seed.
std::vector<RawReading> generate_stream(const TelemetrySnapshot& base, const StreamSpec& spec,
                                        double horizon_s, std::uint64_t seed);

// One snapshot at the cycle timestamp from the sorted reading stream. Every
// ingested parameter carries exactly one confidence tag; a Hold tag marks the
// snapshot so the loop skips optimization. Readings more than a day plus one
// cycle older than the timestamp are out of ingestion scope.
TelemetrySnapshot ingest(const std::vector<RawReading>& readings, std::int64_t cycle_ts,
                         const FreshnessPolicy& policy, const TelemetrySnapshot& base);

// State estimate from an ingested snapshot history: slowly varying fields
// (water intensity, link delay) exponentially smoothed with factor 0.2 per
// cycle, fast fields passed through, and per-site carbon and power forecast
// trajectories over the next delta_minutes (seasonal-naive, falling back to
// persistence). Degraded parameters keep their ingested bounds unsmoothed.
TelemetrySnapshot estimate(const std::vector<TelemetrySnapshot>& history, double delta_minutes);

// Newline-delimited JSON replay files, one reading per line.
std::vector<RawReading> load_readings(const std::string& path);
void save_readings(const std::string& path, const std::vector<RawReading>& readings);

}  // namespace sovor
