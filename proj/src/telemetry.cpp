#include "sovor/telemetry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <stdexcept>

namespace sovor {

namespace {

constexpr double kDayS = 86400.0;
constexpr double kBoundWindowS = 3600.0;  // conservative bounds scan this far back

// Reflect v into [lo, hi] so bounded random walks do not pile up at the edges.
double reflect(double v, double lo, double hi) {
  if (!(hi > lo)) return lo;
  double span = hi - lo;
  double x = std::fmod(v - lo, 2.0 * span);
  if (x < 0.0) x += 2.0 * span;
  return lo + (x <= span ? x : 2.0 * span - x);
}

struct ParamRef {
  bool is_site = false;
  SiteId site;
  SiteId from, to;  // when link
  std::string field;
};

ParamRef parse_param(const std::string& param) {
  ParamRef ref;
  auto bad = [&] { throw std::invalid_argument("malformed parameter key '" + param + "'"); };
  if (param.rfind("site/", 0) == 0) {
    auto rest = param.substr(5);
    auto slash = rest.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == rest.size()) bad();
    ref.is_site = true;
    ref.site = rest.substr(0, slash);
    ref.field = rest.substr(slash + 1);
  } else if (param.rfind("link/", 0) == 0) {
    auto rest = param.substr(5);
    auto slash = rest.rfind('/');
    if (slash == std::string::npos || slash + 1 == rest.size()) bad();
    auto pair = rest.substr(0, slash);
    auto arrow = pair.find("->");
    if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= pair.size()) bad();
    ref.from = pair.substr(0, arrow);
    ref.to = pair.substr(arrow + 2);
    ref.field = rest.substr(slash + 1);
  } else {
    bad();
  }
  return ref;
}

// Writes one telemetered value into the snapshot; throws on fields that are
// static policy rather than telemetry.
void apply_value(TelemetrySnapshot& snap, const std::string& param, const ParamRef& ref,
                 double value) {
  if (ref.is_site) {
    for (auto& s : snap.sites) {
      if (s.id != ref.site) continue;
      if (ref.field == "power_cap") s.power_cap_kw = value;
      else if (ref.field == "carbon_intensity") s.carbon_intensity_g_per_kwh = value;
      else if (ref.field == "water_intensity") s.water_intensity_l_per_kwh = value;
      else if (ref.field == "water_permit") s.water_permit_l_per_h = value;
      else if (ref.field == "onsite_gen") s.onsite_gen_kw = value;
      else if (ref.field == "onsite_batt") s.onsite_batt_kw = value;
      else if (ref.field == "thermal_cooling_cap") s.thermal_cooling_cap_kw = value;
      else throw std::invalid_argument("'" + ref.field + "' is not a telemetered site field: " + param);
      return;
    }
    throw std::invalid_argument("reading for unknown site: " + param);
  }
  for (auto& l : snap.links) {
    if (l.from != ref.from || l.to != ref.to) continue;
    if (ref.field == "capacity") l.capacity_gbps = value;
    else if (ref.field == "delay") l.delay_ms = value;
    else if (ref.field == "utilization") l.utilization = value;
    else if (ref.field == "alarmed") l.alarmed = value >= 0.5;
    else throw std::invalid_argument("'" + ref.field + "' is not a telemetered link field: " + param);
    return;
  }
  throw std::invalid_argument("reading for unknown link: " + param);
}

StreamDomain domain_for_field(const std::string& field) {
  if (field == "carbon_intensity") return StreamDomain::Carbon;
  if (field == "water_intensity" || field == "water_permit") return StreamDomain::Water;
  if (field == "power_cap" || field == "onsite_gen" || field == "onsite_batt")
    return StreamDomain::Power;
  return StreamDomain::Network;
}

}  // namespace

const char* to_string(StreamDomain d) {
  switch (d) {
    case StreamDomain::Power: return "Power";
    case StreamDomain::Carbon: return "Carbon";
    case StreamDomain::Water: return "Water";
    case StreamDomain::Network: return "Network";
    case StreamDomain::Workload: return "Workload";
  }
  return "?";
}

StreamDomain stream_domain_from_string(const std::string& s) {
  if (s == "Power") return StreamDomain::Power;
  if (s == "Carbon") return StreamDomain::Carbon;
  if (s == "Water") return StreamDomain::Water;
  if (s == "Network") return StreamDomain::Network;
  if (s == "Workload") return StreamDomain::Workload;
  throw std::invalid_argument("unknown stream domain '" + s + "'");
}

const char* to_string(StaleTier t) {
  switch (t) {
    case StaleTier::ForecastSubstitute: return "ForecastSubstitute";
    case StaleTier::ConservativeBound: return "ConservativeBound";
    case StaleTier::Hold: return "Hold";
  }
  return "?";
}

FreshnessPolicy FreshnessPolicy::defaults(double cycle_s) {
  FreshnessPolicy p;
  p.cycle_s = cycle_s;
  const double tau = 900.0;
  p.field_defaults["carbon_intensity"] = {tau, StaleTier::ForecastSubstitute};
  p.field_defaults["water_intensity"] = {tau, StaleTier::ForecastSubstitute};
  p.field_defaults["delay"] = {tau, StaleTier::ForecastSubstitute};
  p.field_defaults["power_cap"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["capacity"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["utilization"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["water_permit"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["onsite_gen"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["onsite_batt"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["thermal_cooling_cap"] = {tau, StaleTier::ConservativeBound};
  p.field_defaults["alarmed"] = {tau, StaleTier::Hold};
  return p;
}

ParameterPolicy FreshnessPolicy::policy_for(const std::string& parameter) const {
  auto it = overrides.find(parameter);
  if (it != overrides.end()) return it->second;
  auto slash = parameter.rfind('/');
  std::string field = slash == std::string::npos ? parameter : parameter.substr(slash + 1);
  auto fit = field_defaults.find(field);
  if (fit != field_defaults.end()) return fit->second;
  return {900.0, StaleTier::Hold};  // unknown telemetry cannot be substituted
}

double GaussianSource::uniform() {
  // 53-bit mantissa draw, nudged away from zero for the Box-Muller log.
  double u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  return u > 0.0 ? u : 0x1.0p-53;
}

double GaussianSource::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = uniform(), u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::vector<RawReading> generate_stream(const TelemetrySnapshot& base, const StreamSpec& spec,
                                        double horizon_s, std::uint64_t seed) {
  if (!(spec.cycle_s > 0.0)) throw std::invalid_argument("cycle length must be positive");
  GaussianSource rng(seed);

  std::vector<const Site*> sites;
  for (const auto& s : base.sites) sites.push_back(&s);
  std::sort(sites.begin(), sites.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<const Link*> links;
  for (const auto& l : base.links) links.push_back(&l);
  std::sort(links.begin(), links.end(), [](auto* a, auto* b) {
    return std::tie(a->from, a->to) < std::tie(b->from, b->to);
  });

  std::map<SiteId, double> walk;  // power-cap random walk state
  for (auto* s : sites) walk[s->id] = s->power_cap_kw;

  auto dropped = [&](const std::string& param, double t) {
    for (const auto& d : spec.dropouts)
      if (d.parameter == param && t >= d.begin_s && t < d.end_s) return true;
    return false;
  };

  std::vector<RawReading> out;
  auto emit = [&](const std::string& field, const std::string& param, double value, double t) {
    if (dropped(param, t)) return;
    out.push_back({domain_for_field(field), param, value, t, "synthetic"});
  };

  for (double t = 0.0; t <= horizon_s + 1e-9; t += spec.cycle_s) {
    for (auto* s : sites) {
      double carbon = s->carbon_intensity_g_per_kwh;
      if (auto it = spec.carbon.find(s->id); it != spec.carbon.end()) {
        const CarbonProfile& c = it->second;
        carbon = c.mean + c.amplitude * std::sin(2.0 * std::numbers::pi * t / kDayS + c.phase_rad);
        if (c.noise_sd > 0.0) carbon += c.noise_sd * rng.next();
        carbon = std::max(0.0, carbon);
      }
      emit("carbon_intensity", site_param(s->id, "carbon_intensity"), carbon, t);

      double omega = s->water_intensity_l_per_kwh;
      double permit = s->water_permit_l_per_h;
      if (auto it = spec.stress.find(s->id); it != spec.stress.end() && it->second.active(t)) {
        omega *= it->second.water_intensity_factor;
        permit *= it->second.water_permit_factor;
      }
      if (auto it = spec.water_noise_sd.find(s->id); it != spec.water_noise_sd.end())
        omega = std::max(0.0, omega + it->second * rng.next());
      emit("water_intensity", site_param(s->id, "water_intensity"), omega, t);
      emit("water_permit", site_param(s->id, "water_permit"), permit, t);

      double cap = s->power_cap_kw;
      if (auto it = spec.power_walk_sd.find(s->id); it != spec.power_walk_sd.end()) {
        double& state = walk[s->id];
        state = reflect(state + it->second * rng.next(), spec.power_floor_frac * cap, cap);
        cap = state;
      }
      emit("power_cap", site_param(s->id, "power_cap"), cap, t);
    }
    for (auto* l : links) {
      double util = l->utilization;
      std::string key = l->from + "->" + l->to;
      if (auto it = spec.utilization_noise_sd.find(key); it != spec.utilization_noise_sd.end())
        util = std::clamp(util + it->second * rng.next(), 0.0, 0.95);
      emit("utilization", link_param(l->from, l->to, "utilization"), util, t);
      emit("capacity", link_param(l->from, l->to, "capacity"), l->capacity_gbps, t);
      emit("delay", link_param(l->from, l->to, "delay"), l->delay_ms, t);
      emit("alarmed", link_param(l->from, l->to, "alarmed"), l->alarmed ? 1.0 : 0.0, t);
    }
  }
  return out;
}

TelemetrySnapshot ingest(const std::vector<RawReading>& readings, std::int64_t cycle_ts,
                         const FreshnessPolicy& policy, const TelemetrySnapshot& base) {
  for (size_t i = 1; i < readings.size(); ++i)
    if (readings[i].timestamp_s < readings[i - 1].timestamp_s)
      throw std::invalid_argument("readings are not time-ordered at index " + std::to_string(i));

  const double ts = static_cast<double>(cycle_ts);
  // Only the trailing day plus one cycle can influence this snapshot: that
  // covers the freshest reading, the bound window and the seasonal donor.
  auto lo = std::partition_point(readings.begin(), readings.end(), [&](const RawReading& r) {
    return r.timestamp_s < ts - kDayS - policy.cycle_s - 1e-9;
  });
  auto hi = std::partition_point(lo, readings.end(),
                                 [&](const RawReading& r) { return r.timestamp_s <= ts + 1e-9; });

  // Per parameter, in scan order: latest value, trailing-hour extremes, and
  // the reading nearest the same time yesterday.
  struct Track {
    bool seen = false;
    double last_ts = 0.0, last_value = 0.0;
    bool bounded = false;
    double bound_min = 0.0, bound_max = 0.0;
    bool donor = false;
    double donor_dist = 0.0, donor_value = 0.0;
  };
  std::map<std::string, Track> tracks;
  for (auto it = lo; it != hi; ++it) {
    if (it->parameter.rfind("workload/", 0) == 0) continue;  // plant stream
    Track& tr = tracks[it->parameter];
    if (!tr.seen || it->timestamp_s >= tr.last_ts) {
      tr.seen = true;
      tr.last_ts = it->timestamp_s;
      tr.last_value = it->value;
    }
    if (it->timestamp_s >= ts - kBoundWindowS) {
      if (!tr.bounded) {
        tr.bounded = true;
        tr.bound_min = tr.bound_max = it->value;
      } else {
        tr.bound_min = std::min(tr.bound_min, it->value);
        tr.bound_max = std::max(tr.bound_max, it->value);
      }
    }
    double dist = std::fabs(it->timestamp_s - (ts - kDayS));
    if (dist <= policy.cycle_s / 2.0 + 1e-9 && (!tr.donor || dist < tr.donor_dist)) {
      tr.donor = true;
      tr.donor_dist = dist;
      tr.donor_value = it->value;
    }
  }

  TelemetrySnapshot snap = base;
  snap.timestamp_s = cycle_ts;
  snap.confidence.clear();
  snap.forecasts.clear();
  snap.forecast_horizon_min = 0.0;

  for (const auto& [param, tr] : tracks) {
    ParamRef ref = parse_param(param);
    double age = ts - tr.last_ts;
    ParameterPolicy pol = policy.policy_for(param);
    double value = tr.last_value;
    Confidence tag = Confidence::Hold;
    if (age <= policy.cycle_s + 1e-9) {
      tag = Confidence::Fresh;
    } else if (age <= pol.tau_max_s + 1e-9) {
      tag = Confidence::Interpolated;  // forward-hold of the last known good
    } else {
      switch (pol.tier) {
        case StaleTier::ForecastSubstitute:
          // Seasonal-naive substitution, persisting the stale value when no
          // same-time-yesterday donor exists.
          value = tr.donor ? tr.donor_value : tr.last_value;
          tag = Confidence::ForecastSubstituted;
          break;
        case StaleTier::ConservativeBound:
          if (tr.bounded) {
            value = ref.field == "utilization" ? tr.bound_max : tr.bound_min;
            tag = Confidence::ConservativeBound;
          } else {
            tag = Confidence::Hold;  // nothing recent enough to bound
          }
          break;
        case StaleTier::Hold:
          tag = Confidence::Hold;
          break;
      }
    }
    if (tag != Confidence::Hold) apply_value(snap, param, ref, value);
    snap.confidence[param] = tag;
  }
  return snap;
}

TelemetrySnapshot estimate(const std::vector<TelemetrySnapshot>& history, double delta_minutes) {
  if (history.empty()) throw std::invalid_argument("estimate needs at least one snapshot");
  const TelemetrySnapshot& cur = history.back();
  TelemetrySnapshot out = cur;

  auto degraded = [&](const std::string& param) {
    auto it = cur.confidence.find(param);
    return it != cur.confidence.end() &&
           (it->second == Confidence::ForecastSubstituted ||
            it->second == Confidence::ConservativeBound || it->second == Confidence::Hold);
  };

  // Slow parameters: exponential smoothing across the history, factor 0.2
  // per cycle. Degraded values stay at their ingested bounds.
  constexpr double kEma = 0.2;
  for (auto& s : out.sites) {
    std::string param = site_param(s.id, "water_intensity");
    if (degraded(param)) continue;
    bool started = false;
    double ema = 0.0;
    for (const auto& h : history) {
      const Site* hs = h.find_site(s.id);
      if (!hs) continue;
      ema = started ? kEma * hs->water_intensity_l_per_kwh + (1.0 - kEma) * ema
                    : hs->water_intensity_l_per_kwh;
      started = true;
    }
    if (started) s.water_intensity_l_per_kwh = ema;
  }
  for (auto& l : out.links) {
    std::string param = link_param(l.from, l.to, "delay");
    if (degraded(param)) continue;
    bool started = false;
    double ema = 0.0;
    for (const auto& h : history) {
      const Link* hl = h.find_link(l.from, l.to);
      if (!hl) continue;
      ema = started ? kEma * hl->delay_ms + (1.0 - kEma) * ema : hl->delay_ms;
      started = true;
    }
    if (started) l.delay_ms = ema;
  }

  // Forecast trajectories for the fast parameters: seasonal-naive against
  // the history, persistence when no donor snapshot exists.
  out.forecast_horizon_min = delta_minutes;
  double cycle_s = 300.0;
  if (history.size() >= 2)
    cycle_s = static_cast<double>(history.back().timestamp_s -
                                  history[history.size() - 2].timestamp_s);
  if (!(cycle_s > 0.0)) cycle_s = 300.0;
  int steps = std::max(1, static_cast<int>(std::lround(delta_minutes * 60.0 / cycle_s)));

  auto donor_snapshot = [&](double target_ts) -> const TelemetrySnapshot* {
    const TelemetrySnapshot* best = nullptr;
    double best_dist = cycle_s / 2.0 + 1e-9;
    for (const auto& h : history) {
      double dist = std::fabs(static_cast<double>(h.timestamp_s) - target_ts);
      if (dist <= best_dist) {
        best_dist = dist;
        best = &h;
      }
    }
    return best;
  };

  for (const auto& s : out.sites) {
    std::vector<double> carbon, power;
    for (int j = 1; j <= steps; ++j) {
      double target = static_cast<double>(cur.timestamp_s) + j * cycle_s - kDayS;
      const TelemetrySnapshot* donor = donor_snapshot(target);
      const Site* ds = donor ? donor->find_site(s.id) : nullptr;
      carbon.push_back(ds ? ds->carbon_intensity_g_per_kwh : s.carbon_intensity_g_per_kwh);
      power.push_back(ds ? ds->power_cap_kw : s.power_cap_kw);
    }
    out.forecasts[site_param(s.id, "carbon_intensity")] = std::move(carbon);
    out.forecasts[site_param(s.id, "power_cap")] = std::move(power);
  }
  return out;
}

std::vector<RawReading> load_readings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open readings file: " + path);
  std::vector<RawReading> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    RawReading r;
    r.domain = stream_domain_from_string(j.at("domain").get<std::string>());
    r.parameter = j.at("parameter").get<std::string>();
    r.value = j.at("value").get<double>();
    r.timestamp_s = j.at("timestamp").get<double>();
    r.source = j.value("source", std::string{});
    out.push_back(std::move(r));
  }
  return out;
}

void save_readings(const std::string& path, const std::vector<RawReading>& readings) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open readings file for write: " + path);
  for (const auto& r : readings) {
    nlohmann::json j{{"domain", to_string(r.domain)},
                     {"parameter", r.parameter},
                     {"value", r.value},
                     {"timestamp", r.timestamp_s},
                     {"source", r.source}};
    out << j.dump() << '\n';
  }
}

}  // namespace sovor
