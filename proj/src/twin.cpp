#include "sovor/twin.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>

#include "sovor/json_io.hpp"
#include "sovor/routing.hpp"
#include "sovor/verify.hpp"

namespace sovor {

namespace {

constexpr double kTol = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

const Workload* find_workload(const std::vector<Workload>& workloads, const WorkloadId& id) {
  for (const auto& w : workloads)
    if (w.id == id) return &w;
  return nullptr;
}

// Region a locality tag demands: "eu-only" and "eu" both pin to region "eu".
std::string required_region(const std::string& tag) {
  const std::string suffix = "-only";
  if (tag.size() > suffix.size() && tag.compare(tag.size() - suffix.size(), suffix.size(), suffix) == 0)
    return tag.substr(0, tag.size() - suffix.size());
  return tag;
}

void refresh_measured(PlantState& state, const TelemetrySnapshot& snap,
                      const std::vector<Workload>& workloads) {
  state.power_draw_kw.clear();
  state.water_draw_l_per_h.clear();
  state.link_flows_gbps.clear();
  for (const auto& [wid, sid] : state.placement.assignment) {
    const Workload* w = find_workload(workloads, wid);
    const Site* s = snap.find_site(sid);
    if (!w || !s) continue;
    state.power_draw_kw[sid] += w->power_kw;
    state.water_draw_l_per_h[sid] += s->water_intensity_l_per_kwh * w->power_kw;
  }
  for (const auto& [wid, flows] : state.placement.flows)
    for (const auto& [edge, f] : flows) state.link_flows_gbps[edge] += f;
}

}  // namespace

TwinVerdict validate(const Placement& candidate, const TelemetrySnapshot& snap,
                     const std::vector<Workload>& workloads, const TwinThresholds& thresholds) {
  TwinVerdict v;

  std::map<SiteId, double> load;
  for (const auto& [wid, sid] : candidate.assignment) {
    const Workload* w = find_workload(workloads, wid);
    if (w) load[sid] += w->power_kw;
  }

  for (const auto& s : snap.sites) {
    double p = load.count(s.id) ? load[s.id] : 0.0;
    if (p <= 0.0) continue;
    double cooling = s.thermal_cooling_cap_kw * thresholds.ambient_derating;
    if (p > cooling + kTol) {
      v.thermal = false;
      v.failures.push_back("thermal margin: site '" + s.id + "' cooling supports " + fmt(cooling) +
                           " kW, placement draws " + fmt(p));
    }
    double headroom = s.power_cap_kw - p;
    if (headroom < s.ups_headroom_frac * s.power_cap_kw - kTol) {
      v.power_stability = false;
      v.failures.push_back("power stability: site '" + s.id + "' headroom " + fmt(headroom) +
                           " kW is under the ride-through reserve of " +
                           fmt(s.ups_headroom_frac * s.power_cap_kw) + " kW");
    }
  }

  std::map<EdgeKey, double> flow;
  for (const auto& [wid, flows] : candidate.flows)
    for (const auto& [edge, f] : flows) flow[edge] += f;
  for (const auto& l : snap.links) {
    auto it = flow.find({l.from, l.to});
    if (it == flow.end() || it->second <= 0.0) continue;
    double post = l.capacity_gbps > 0.0 ? l.utilization + it->second / l.capacity_gbps : 2.0;
    if (post > thresholds.congestion_threshold + kTol) {
      v.congestion = false;
      v.failures.push_back("network congestion: link " + l.from + "->" + l.to + " would run at " +
                           fmt(post * 100.0) + "%, threshold " +
                           fmt(thresholds.congestion_threshold * 100.0) + "%");
    }
  }

  for (const auto& [wid, sid] : candidate.assignment) {
    const Workload* w = find_workload(workloads, wid);
    const Site* s = snap.find_site(sid);
    if (!w || !s) continue;
    for (const auto& tag : w->locality_tags) {
      std::string region = required_region(tag);
      if (s->region_tag != region) {
        v.policy = false;
        v.failures.push_back("policy compliance: workload '" + wid + "' tag '" + tag +
                             "' forbids region '" + s->region_tag + "' at site '" + sid + "'");
      }
    }
  }
  return v;
}

PlantState PlantState::with_placement(const Placement& next, const TelemetrySnapshot& snap,
                                      const std::vector<Workload>& workloads,
                                      std::int64_t ts) const {
  PlantState out = *this;
  Network net(snap);
  double transition_g = 0.0;
  for (const auto& [wid, nsid] : next.assignment) {
    auto old = placement.assignment.find(wid);
    if (old == placement.assignment.end() || old->second == nsid) continue;
    const Workload* w = find_workload(workloads, wid);
    if (!w) continue;
    transition_g +=
        transition_carbon_g(net, snap, *w, net.site_index(old->second), net.site_index(nsid));
  }
  out.placement = next;
  out.cumulative_carbon_g += transition_g;
  out.last_update_s = ts;
  refresh_measured(out, snap, workloads);
  return out;
}

PlantState PlantState::accrue(const TelemetrySnapshot& snap, const std::vector<Workload>& workloads,
                              double cycle_s) const {
  PlantState out = *this;
  refresh_measured(out, snap, workloads);
  double carbon_rate = 0.0, water_rate = 0.0;
  for (const auto& [wid, sid] : out.placement.assignment) {
    const Workload* w = find_workload(workloads, wid);
    const Site* s = snap.find_site(sid);
    if (!w || !s) continue;
    carbon_rate += blended_carbon_intensity(*s) * w->power_kw;
    water_rate += s->water_intensity_l_per_kwh * w->power_kw;
  }
  out.cumulative_carbon_g += carbon_rate * cycle_s / 3600.0;
  out.cumulative_water_l += water_rate * cycle_s / 3600.0;
  return out;
}

const char* to_string(CycleOutcome o) {
  switch (o) {
    case CycleOutcome::Executed: return "Executed";
    case CycleOutcome::RetainedWithAlert: return "RetainedWithAlert";
    case CycleOutcome::RetainedWithCertificate: return "RetainedWithCertificate";
    case CycleOutcome::Hold: return "Hold";
  }
  return "?";
}

nlohmann::json to_json(const CycleRecord& rec) {
  nlohmann::json j{{"timestamp", rec.timestamp_s},
                   {"outcome", to_string(rec.outcome)},
                   {"placement", to_json(rec.placement)},
                   {"objective", rec.objective},
                   {"solver_nodes", rec.solver_nodes},
                   {"solve_seconds", rec.solve_seconds},
                   {"twin_retries", rec.twin_retries},
                   {"twin_failures", rec.twin_failures},
                   {"alerts", rec.alerts},
                   {"cycle_carbon_g", rec.cycle_carbon_g},
                   {"cycle_water_l", rec.cycle_water_l},
                   {"cumulative_carbon_g", rec.cumulative_carbon_g},
                   {"cumulative_water_l", rec.cumulative_water_l}};
  if (rec.certificate) j["certificate"] = to_json(*rec.certificate);
  return j;
}

ControlLoop::ControlLoop(TelemetrySnapshot base, std::vector<Workload> workloads,
                         LoopConfig config)
    : base_(std::move(base)), workloads_(std::move(workloads)), config_(std::move(config)) {
  auto problems = validate_snapshot(base_);
  if (!problems.empty()) throw std::invalid_argument("invalid base snapshot: " + problems.front());
}

CycleRecord ControlLoop::run_cycle(const std::vector<RawReading>& readings,
                                   std::int64_t cycle_ts) {
  CycleRecord rec;
  rec.timestamp_s = cycle_ts;
  const double before_carbon = plant_.cumulative_carbon_g;
  const double before_water = plant_.cumulative_water_l;

  auto finish = [&](CycleOutcome outcome, const TelemetrySnapshot& rates) {
    rec.outcome = outcome;
    plant_ = plant_.accrue(rates, workloads_, config_.cycle_s);
    rec.placement = plant_.placement;
    rec.cycle_carbon_g = plant_.cumulative_carbon_g - before_carbon;
    rec.cycle_water_l = plant_.cumulative_water_l - before_water;
    rec.cumulative_carbon_g = plant_.cumulative_carbon_g;
    rec.cumulative_water_l = plant_.cumulative_water_l;
    if (config_.alerts_to_stderr)
      for (const auto& a : rec.alerts) std::cerr << "[cycle " << cycle_ts << "] " << a << "\n";
    records_.push_back(rec);
    return rec;
  };

  // Observe.
  TelemetrySnapshot snap = ingest(readings, cycle_ts, config_.freshness, base_);
  if (snap.hold()) {
    for (const auto& [param, conf] : snap.confidence)
      if (conf == Confidence::Hold)
        rec.alerts.push_back("hold: parameter '" + param + "' is stale beyond substitution");
    // Skip optimization; the plant keeps running at the last trusted rates.
    return finish(CycleOutcome::Hold, history_.empty() ? base_ : history_.back());
  }

  // Estimate.
  history_.push_back(snap);
  const std::size_t keep = static_cast<std::size_t>(86400.0 / config_.cycle_s) + 2;
  if (history_.size() > keep) history_.erase(history_.begin(), history_.end() - keep);
  TelemetrySnapshot est = estimate(history_, config_.delta_minutes);

  // Optimize, normalizing over the forecast horizon as well as the present.
  BuildConfig cfg = config_.build;
  if (!plant_.placement.empty()) cfg.incumbent = plant_.placement;
  NormalizationWindow window = NormalizationWindow::from_snapshot(est);
  for (const auto& s : est.sites) {
    auto it = est.forecasts.find(site_param(s.id, "carbon_intensity"));
    if (it == est.forecasts.end()) continue;
    Site tmp = s;
    for (double fc : it->second) {
      tmp.carbon_intensity_g_per_kwh = fc;
      window.absorb_values(blended_carbon_intensity(tmp), s.water_intensity_l_per_kwh);
    }
  }
  cfg.window = window;

  MilpInstance inst = build_instance(est, workloads_, cfg, config_.relaxed);
  Placement candidate;
  for (int attempt = 0;; ++attempt) {
    SolveOutcome outcome = solve(inst, config_.solver_budget_s);
    rec.solver_nodes += outcome.nodes;
    rec.solve_seconds += outcome.wall_seconds;

    if (outcome.status == SolveStatus::Infeasible) {
      if (attempt == 0) {
        // Cut-free infeasibility is certifiable; surface the certificate.
        rec.certificate = extract_iis(inst, config_.iis_budget_s);
        rec.alerts.push_back("no feasible placement; certificate with " +
                             std::to_string(rec.certificate->groups.size()) +
                             " constraint groups");
        return finish(CycleOutcome::RetainedWithCertificate, est);
      }
      rec.alerts.push_back("no twin-validated placement after " + std::to_string(attempt) +
                           " exclusions; placement retained");
      return finish(CycleOutcome::RetainedWithAlert, est);
    }
    if (!outcome.placement) {
      rec.alerts.push_back("solver budget exhausted with no incumbent; placement retained");
      return finish(CycleOutcome::RetainedWithAlert, est);
    }
    candidate = *outcome.placement;
    rec.objective = outcome.objective;
    if (outcome.status == SolveStatus::Timeout)
      rec.alerts.push_back("optimality not certified in budget; executing best incumbent (gap " +
                           std::to_string(outcome.gap) + ")");

    VerifyReport verdict = verify_placement(est, workloads_, candidate, cfg);
    if (!verdict.ok()) {
      rec.alerts.push_back("candidate failed independent verification: " +
                           verdict.violations.front());
      return finish(CycleOutcome::RetainedWithAlert, est);
    }

    if (!config_.twin_enabled) break;
    TwinVerdict twin = validate(candidate, est, workloads_, config_.twin);
    if (twin.pass()) break;

    rec.twin_failures = twin.failures;
    if (attempt >= config_.max_twin_retries) {
      rec.alerts.push_back("twin rejected " + std::to_string(attempt + 1) +
                           " candidates; placement retained");
      return finish(CycleOutcome::RetainedWithAlert, est);
    }
    // Exclude exactly this assignment and re-solve.
    ++rec.twin_retries;
    inst = add_nogood_cut(inst, candidate.assignment);
  }

  // Execute: both planes swap atomically; transition carbon books here once.
  plant_ = plant_.with_placement(candidate, est, workloads_, cycle_ts);
  return finish(CycleOutcome::Executed, est);
}

}  // namespace sovor
