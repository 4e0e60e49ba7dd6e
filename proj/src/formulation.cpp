#include "sovor/formulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sovor {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
  return out;
}

std::string edge_key(const SiteId& from, const SiteId& to) { return from + "->" + to; }

}  // namespace

const char* to_string(ConstraintClass c) {
  switch (c) {
    case ConstraintClass::CarbonGate: return "CarbonGate";
    case ConstraintClass::WaterCap: return "WaterCap";
    case ConstraintClass::PowerCap: return "PowerCap";
    case ConstraintClass::LatencyGate: return "LatencyGate";
    case ConstraintClass::LinkCap: return "LinkCap";
    case ConstraintClass::Assignment: return "Assignment";
    case ConstraintClass::FlowBalance: return "FlowBalance";
    case ConstraintClass::NoGood: return "NoGood";
  }
  return "?";
}

const char* to_string(GateReason r) {
  switch (r) {
    case GateReason::Carbon: return "carbon ceiling";
    case GateReason::Latency: return "latency budget";
    case GateReason::Portability: return "non-portable workload";
    case GateReason::SingletonPower: return "exceeds site power alone";
    case GateReason::SingletonWater: return "exceeds water permit alone";
  }
  return "?";
}

std::string GroupId::label() const { return std::string(to_string(cls)) + "[" + key + "]"; }

bool Relaxation::drops(const GroupId& g) const {
  switch (g.cls) {
    case ConstraintClass::CarbonGate: return carbon_sites.count(g.key) > 0;
    case ConstraintClass::WaterCap: return water_sites.count(g.key) > 0;
    case ConstraintClass::PowerCap: return power_sites.count(g.key) > 0;
    case ConstraintClass::LatencyGate: return latency_workloads.count(g.key) > 0;
    case ConstraintClass::LinkCap: return link_edges.count(g.key) > 0;
    case ConstraintClass::Assignment: return assignment_workloads.count(g.key) > 0;
    default: return false;
  }
}

void Relaxation::drop(const GroupId& g) {
  switch (g.cls) {
    case ConstraintClass::CarbonGate: carbon_sites.insert(g.key); break;
    case ConstraintClass::WaterCap: water_sites.insert(g.key); break;
    case ConstraintClass::PowerCap: power_sites.insert(g.key); break;
    case ConstraintClass::LatencyGate: latency_workloads.insert(g.key); break;
    case ConstraintClass::LinkCap: link_edges.insert(g.key); break;
    case ConstraintClass::Assignment: assignment_workloads.insert(g.key); break;
    default: throw std::invalid_argument("group is not relaxable");
  }
}

double blended_carbon_intensity(const Site& site) {
  if (site.power_cap_kw <= 0.0) return site.carbon_intensity_g_per_kwh;
  double covered = (site.onsite_gen_kw + site.onsite_batt_kw) / site.power_cap_kw;
  return site.carbon_intensity_g_per_kwh * std::max(0.0, 1.0 - covered);
}

NormalizationWindow NormalizationWindow::from_snapshot(const TelemetrySnapshot& snap) {
  NormalizationWindow w;
  w.absorb(snap);
  return w;
}

void NormalizationWindow::absorb(const TelemetrySnapshot& snap) {
  for (const auto& s : snap.sites)
    absorb_values(blended_carbon_intensity(s), s.water_intensity_l_per_kwh);
}

void NormalizationWindow::absorb_values(double gamma_eff, double omega) {
  if (!initialized) {
    gamma_min = gamma_max = gamma_eff;
    omega_min = omega_max = omega;
    initialized = true;
    return;
  }
  gamma_min = std::min(gamma_min, gamma_eff);
  gamma_max = std::max(gamma_max, gamma_eff);
  omega_min = std::min(omega_min, omega);
  omega_max = std::max(omega_max, omega);
}

double NormalizationWindow::norm_gamma(double gamma_eff) const {
  double span = gamma_max - gamma_min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((gamma_eff - gamma_min) / span, 0.0, 1.0);
}

double NormalizationWindow::norm_omega(double omega) const {
  double span = omega_max - omega_min;
  if (!(span > 0.0)) return 0.0;
  return std::clamp((omega - omega_min) / span, 0.0, 1.0);
}

double migration_carbon_g(double gamma_source_g_per_kwh, double energy_j_per_bit,
                          double state_gb) {
  double joules = energy_j_per_bit * state_gb * kBitsPerGb;
  return gamma_source_g_per_kwh * joules / kJoulesPerKwh;
}

namespace {

// Transfer bandwidth between two sites: residual capacity of the direct link,
// falling back to the bottleneck residual along the minimum-delay path.
// Zero when unreachable.
double transfer_bandwidth_gbps(const Network& net, int from, int to) {
  int direct = net.edge_between(from, to);
  if (direct >= 0) {
    const auto& e = net.edges()[direct];
    return e.capacity_gbps * std::max(0.0, 1.0 - e.utilization);
  }
  // Dijkstra by delay, then bottleneck residual along the found path.
  int n = net.num_sites();
  std::vector<double> dist(n, kInf);
  std::vector<int> prev(n, -1);
  std::vector<char> done(n, 0);
  dist[from] = 0.0;
  for (int it = 0; it < n; ++it) {
    int u = -1;
    double best = kInf;
    for (int i = 0; i < n; ++i)
      if (!done[i] && dist[i] < best) best = dist[i], u = i;
    if (u < 0) break;
    done[u] = 1;
    for (int ei : net.out_edges(u)) {
      const auto& e = net.edges()[ei];
      if (dist[u] + e.delay_ms < dist[e.to]) {
        dist[e.to] = dist[u] + e.delay_ms;
        prev[e.to] = u;
      }
    }
  }
  if (dist[to] == kInf) return 0.0;
  double bottleneck = kInf;
  for (int v = to; prev[v] != -1; v = prev[v]) {
    const auto& e = net.edges()[net.edge_between(prev[v], v)];
    bottleneck = std::min(bottleneck, e.capacity_gbps * std::max(0.0, 1.0 - e.utilization));
  }
  return bottleneck;
}

}  // namespace

std::optional<LatencyBudget> effective_latency_budget(const Workload& workload,
                                                      const SiteId& source,
                                                      const SiteId& candidate,
                                                      const TelemetrySnapshot& snap) {
  if (source == candidate) return workload.latency_slo;
  if (!workload.portable)
    throw std::invalid_argument("workload '" + workload.id + "' is not portable");
  Network net(snap);
  int si = net.site_index(source);
  int ci = net.site_index(candidate);
  if (si < 0 || ci < 0) throw std::invalid_argument("unknown site in migration pair");
  double bw = transfer_bandwidth_gbps(net, si, ci);
  double tx_ms = bw > 0.0 ? 8.0 * workload.state_size_gb / bw * 1e3 : kInf;
  double rh_ms = workload.rehydration_at(candidate);
  if (workload.latency_slo.is_unbounded()) {
    if (!std::isfinite(tx_ms)) return std::nullopt;  // state cannot move at all
    return LatencyBudget::unbounded();
  }
  double remaining = workload.latency_slo.ms() - tx_ms - rh_ms;
  if (remaining <= 0.0) return std::nullopt;
  return LatencyBudget::millis(remaining);
}

double transition_carbon_g(const Network& net, const TelemetrySnapshot& snap, const Workload& w,
                           int from, int to) {
  if (from == to || from < 0 || to < 0) return 0.0;
  int ei = net.edge_between(from, to);
  double e_bit = ei >= 0 ? net.edges()[ei].energy_j_per_bit : 0.0;
  if (ei < 0) {
    // No direct link: charge the min-delay route's total per-bit energy.
    double total = 0.0;
    bool found = false;
    auto all =
        enumerate_admissible_paths(net, from, to, LatencyBudget::unbounded(), net.num_sites());
    double best = kInf;
    for (const auto& p : all) {
      if (p.delay_ms < best) {
        best = p.delay_ms;
        total = 0.0;
        for (size_t h = 0; h + 1 < p.nodes.size(); ++h)
          total += net.edges()[net.edge_between(p.nodes[h], p.nodes[h + 1])].energy_j_per_bit;
        found = true;
      }
    }
    e_bit = found ? total : 0.0;
  }
  const Site* source = snap.find_site(net.site_id(from));
  double gamma = source ? blended_carbon_intensity(*source) : 0.0;
  return migration_carbon_g(gamma, e_bit, w.state_size_gb);
}

int MilpInstance::x_index(int site, int workload) const {
  for (int i = 0; i < static_cast<int>(binaries.size()); ++i)
    if (binaries[i].site == site && binaries[i].workload == workload) return i;
  return -1;
}

LpProblem MilpInstance::to_lp() const {
  LpProblem lp;
  lp.num_vars = num_vars();
  auto rows_out = std::make_shared<std::vector<LpRow>>();
  rows_out->reserve(rows.size());
  for (const auto& r : rows) rows_out->push_back(LpRow{r.terms, r.sense, r.rhs});
  lp.rows = rows_out;
  auto obj = std::make_shared<std::vector<double>>();
  obj->reserve(lp.num_vars);
  obj->insert(obj->end(), obj_binaries.begin(), obj_binaries.end());
  obj->insert(obj->end(), obj_paths.begin(), obj_paths.end());
  lp.objective = obj;
  lp.lower.assign(lp.num_vars, 0.0);
  lp.upper.assign(lp.num_vars, kInf);
  for (int i = 0; i < num_binaries(); ++i) lp.upper[i] = 1.0;
  return lp;
}

std::vector<GroupId> MilpInstance::groups() const {
  std::vector<GroupId> out;
  std::set<std::string> carbon_sites, latency_wls;
  for (const auto& g : gate_log) {
    if (g.reason == GateReason::Carbon) carbon_sites.insert(g.site);
    if (g.reason == GateReason::Latency) latency_wls.insert(g.workload);
  }
  for (const auto& s : carbon_sites) out.push_back({ConstraintClass::CarbonGate, s});
  std::set<std::string> seen_water, seen_power, seen_link, seen_assign;
  for (const auto& r : rows) {
    switch (r.cls) {
      case ConstraintClass::WaterCap: seen_water.insert(r.key); break;
      case ConstraintClass::PowerCap: seen_power.insert(r.key); break;
      case ConstraintClass::LinkCap: seen_link.insert(r.key); break;
      case ConstraintClass::Assignment: seen_assign.insert(r.key); break;
      default: break;
    }
  }
  // Singleton gate fixes are implications of the per-site cap rows; dropping
  // the row must also readmit them, so they surface the group even when every
  // candidate pair was fixed.
  for (const auto& g : gate_log) {
    if (g.reason == GateReason::SingletonWater) seen_water.insert(g.site);
    if (g.reason == GateReason::SingletonPower) seen_power.insert(g.site);
  }
  for (const auto& s : seen_water) out.push_back({ConstraintClass::WaterCap, s});
  for (const auto& s : seen_power) out.push_back({ConstraintClass::PowerCap, s});
  for (const auto& w : latency_wls) out.push_back({ConstraintClass::LatencyGate, w});
  for (const auto& e : seen_link) out.push_back({ConstraintClass::LinkCap, e});
  for (const auto& w : seen_assign) out.push_back({ConstraintClass::Assignment, w});
  return out;
}

std::vector<std::string> MilpInstance::group_labels() const {
  std::vector<std::string> out;
  for (const auto& g : groups()) out.push_back(g.label());
  return out;
}

MilpInstance build_instance(const TelemetrySnapshot& snap, const std::vector<Workload>& workloads,
                            const BuildConfig& config, const Relaxation& relaxed) {
  if (!(config.alpha >= 0.0 && config.alpha <= 1.0))
    throw std::invalid_argument("alpha must lie in [0, 1]");
  if (config.hop_limit < 1) throw std::invalid_argument("hop_limit must be >= 1");

  MilpInstance inst;
  inst.snapshot = snap;
  inst.workloads = workloads;
  inst.config = config;
  inst.relaxed = relaxed;
  inst.net = Network(snap);
  const Network& net = inst.net;
  const int n = net.num_sites();
  const int m = static_cast<int>(workloads.size());

  inst.window = config.window ? *config.window : NormalizationWindow::from_snapshot(snap);
  inst.nominal_binaries = n * m;
  inst.nominal_continuous = static_cast<int>(net.edges().size()) * m;

  inst.delays = shortest_delays(net);
  if (config.latency_as_zero)
    for (auto& row : inst.delays)
      for (auto& d : row)
        if (std::isfinite(d)) d = 0.0;

  std::vector<const Site*> site_of(n, nullptr);
  for (const auto& s : snap.sites) site_of[net.site_index(s.id)] = &s;
  std::vector<int> dest_of(m, -1);
  for (int k = 0; k < m; ++k) {
    dest_of[k] = net.site_index(workloads[k].dest);
    if (dest_of[k] < 0)
      throw std::invalid_argument("workload '" + workloads[k].id + "' dest site unknown");
  }

  // Incumbent site per workload, when one exists.
  std::vector<int> incumbent_site(m, -1);
  if (config.incumbent) {
    for (int k = 0; k < m; ++k) {
      auto it = config.incumbent->assignment.find(workloads[k].id);
      if (it != config.incumbent->assignment.end()) incumbent_site[k] = net.site_index(it->second);
    }
  }

  // Gates fix x variables to zero before any row is built. Budgets for
  // surviving pairs are kept for path enumeration.
  std::vector<std::vector<char>> fixed(n, std::vector<char>(m, 0));
  std::vector<std::vector<LatencyBudget>> budget(n, std::vector<LatencyBudget>(m));
  const bool relax_all_latency = config.latency_as_zero;

  for (int i = 0; i < n; ++i) {
    const Site& site = *site_of[i];
    bool carbon_gated = blended_carbon_intensity(site) > site.carbon_ceiling_g_per_kwh &&
                        !relaxed.carbon_sites.count(site.id);
    for (int k = 0; k < m; ++k) {
      const Workload& w = workloads[k];
      if (carbon_gated) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::Carbon,
                                 blended_carbon_intensity(site), site.carbon_ceiling_g_per_kwh});
        continue;
      }
      // Portability pins: a non-portable placed workload cannot move.
      if (incumbent_site[k] >= 0 && incumbent_site[k] != i && !w.portable) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::Portability, 0.0, 0.0});
        continue;
      }
      // Latency admissibility, tightened by migration overheads.
      bool relax_latency = relax_all_latency || relaxed.latency_workloads.count(w.id) > 0;
      std::optional<LatencyBudget> b = LatencyBudget::unbounded();
      if (!relax_latency) {
        if (incumbent_site[k] >= 0 && incumbent_site[k] != i)
          b = effective_latency_budget(w, net.site_id(incumbent_site[k]), site.id, snap);
        else
          b = w.latency_slo;
      }
      if (!b) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::Latency, kInf,
                                 w.latency_slo.is_unbounded() ? kInf : w.latency_slo.ms()});
        continue;
      }
      double d = inst.delays[i][dest_of[k]];
      if (!b->admits(d)) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::Latency, d, b->ms()});
        continue;
      }
      // Singleton strengthening: a workload that alone exceeds a site cap can
      // never be placed there. Tied to the corresponding cap group.
      if (!relaxed.power_sites.count(site.id) && w.power_kw > site.power_cap_kw) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::SingletonPower, w.power_kw,
                                 site.power_cap_kw});
        continue;
      }
      if (!relaxed.water_sites.count(site.id) &&
          site.water_intensity_l_per_kwh * w.power_kw > site.water_permit_l_per_h) {
        fixed[i][k] = 1;
        inst.gate_log.push_back({site.id, w.id, GateReason::SingletonWater,
                                 site.water_intensity_l_per_kwh * w.power_kw,
                                 site.water_permit_l_per_h});
        continue;
      }
      budget[i][k] = *b;
    }
  }

  inst.candidates.assign(m, {});
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k)
      if (!fixed[i][k]) {
        inst.binaries.push_back({i, k});
        inst.candidates[k].push_back(i);
      }
  std::sort(inst.binaries.begin(), inst.binaries.end(), [](const MilpVarX& a, const MilpVarX& b) {
    return std::tie(a.site, a.workload) < std::tie(b.site, b.workload);
  });

  for (int k = 0; k < m; ++k)
    if (inst.candidates[k].empty() && !relaxed.assignment_workloads.count(workloads[k].id)) {
      inst.trivially_infeasible = true;
      inst.trivially_infeasible_why = "no admissible site for workload '" + workloads[k].id + "'";
      break;
    }

  std::map<std::pair<int, int>, int> xidx;
  for (int b = 0; b < static_cast<int>(inst.binaries.size()); ++b)
    xidx[{inst.binaries[b].site, inst.binaries[b].workload}] = b;

  // Path variables for traffic-carrying workloads, per candidate source.
  std::map<std::pair<int, int>, std::vector<int>> paths_of;  // (k, src) -> path var ids
  for (int k = 0; k < m; ++k) {
    const Workload& w = workloads[k];
    if (w.traffic_gbps <= 0.0) continue;
    bool relax_latency = relax_all_latency || relaxed.latency_workloads.count(w.id) > 0;
    for (int src : inst.candidates[k]) {
      if (src == dest_of[k]) continue;
      LatencyBudget b = relax_latency ? LatencyBudget::unbounded() : budget[src][k];
      auto paths = enumerate_admissible_paths(net, src, dest_of[k], b, config.hop_limit);
      auto& ids = paths_of[{k, src}];
      for (auto& p : paths) {
        ids.push_back(static_cast<int>(inst.path_vars.size()));
        inst.path_vars.push_back({k, src, std::move(p)});
      }
    }
  }

  const int nb = static_cast<int>(inst.binaries.size());
  auto path_col = [&](int pv) { return nb + pv; };

  // Objective.
  inst.obj_binaries.assign(nb, 0.0);
  for (int b = 0; b < nb; ++b) {
    const Site& site = *site_of[inst.binaries[b].site];
    const Workload& w = workloads[inst.binaries[b].workload];
    if (config.objective_mode == ObjectiveMode::TotalLatency) {
      double d = inst.delays[inst.binaries[b].site][dest_of[inst.binaries[b].workload]];
      inst.obj_binaries[b] = std::isfinite(d) ? d : 1e6;
      continue;
    }
    double gamma_eff = blended_carbon_intensity(site);
    double carbon_term = inst.window.norm_gamma(gamma_eff) * w.power_kw;
    double water_term = inst.window.norm_omega(site.water_intensity_l_per_kwh) * w.power_kw;
    // Transfer carbon at face value in gCO2eq, charged on the carbon side.
    double migration_term = transition_carbon_g(net, snap, w, incumbent_site[inst.binaries[b].workload],
                                                inst.binaries[b].site);
    inst.obj_binaries[b] =
        config.alpha * (carbon_term + migration_term) + (1.0 - config.alpha) * water_term;
  }
  inst.obj_paths.assign(inst.path_vars.size(), 0.0);
  if (config.include_transport_energy && config.objective_mode == ObjectiveMode::Environmental) {
    for (int pv = 0; pv < static_cast<int>(inst.path_vars.size()); ++pv) {
      const Path& p = inst.path_vars[pv].path;
      double g_per_h_per_gbps = 0.0;
      for (size_t h = 0; h + 1 < p.nodes.size(); ++h) {
        const auto& e = net.edges()[net.edge_between(p.nodes[h], p.nodes[h + 1])];
        // gamma [g/kWh] * e [J/bit] * 1 Gbps = gamma * e * 1e9 J/s = that / 3.6e6 kWh/h
        g_per_h_per_gbps +=
            blended_carbon_intensity(*site_of[p.nodes[h]]) * e.energy_j_per_bit * 1e9 * 3600.0 /
            kJoulesPerKwh;
      }
      inst.obj_paths[pv] = config.alpha * g_per_h_per_gbps;
    }
  }

  // Rows. Assignment first, then site caps, link caps, flow balance.
  for (int k = 0; k < m; ++k) {
    if (relaxed.assignment_workloads.count(workloads[k].id)) continue;
    MilpRow row{ConstraintClass::Assignment, workloads[k].id,
                "assign_w" + sanitize(workloads[k].id), RowSense::Equal, 1.0, {}};
    for (int src : inst.candidates[k]) row.terms.push_back({xidx[{src, k}], 1.0});
    inst.rows.push_back(std::move(row));
  }
  for (int i = 0; i < n; ++i) {
    const Site& site = *site_of[i];
    if (!relaxed.water_sites.count(site.id)) {
      MilpRow row{ConstraintClass::WaterCap, site.id, "water_s" + sanitize(site.id),
                  RowSense::LessEq, site.water_permit_l_per_h, {}};
      for (int k = 0; k < m; ++k)
        if (!fixed[i][k] && workloads[k].power_kw > 0.0)
          row.terms.push_back({xidx[{i, k}], site.water_intensity_l_per_kwh * workloads[k].power_kw});
      if (!row.terms.empty()) inst.rows.push_back(std::move(row));
    }
    if (!relaxed.power_sites.count(site.id)) {
      MilpRow row{ConstraintClass::PowerCap, site.id, "power_s" + sanitize(site.id),
                  RowSense::LessEq, site.power_cap_kw, {}};
      for (int k = 0; k < m; ++k)
        if (!fixed[i][k] && workloads[k].power_kw > 0.0)
          row.terms.push_back({xidx[{i, k}], workloads[k].power_kw});
      if (!row.terms.empty()) inst.rows.push_back(std::move(row));
    }
  }
  if (!config.uncap_links) {
    std::vector<std::vector<int>> paths_on_edge(net.edges().size());
    for (int pv = 0; pv < static_cast<int>(inst.path_vars.size()); ++pv) {
      const Path& p = inst.path_vars[pv].path;
      for (size_t h = 0; h + 1 < p.nodes.size(); ++h)
        paths_on_edge[net.edge_between(p.nodes[h], p.nodes[h + 1])].push_back(pv);
    }
    for (int ei = 0; ei < static_cast<int>(net.edges().size()); ++ei) {
      const auto& e = net.edges()[ei];
      std::string key = edge_key(net.site_id(e.from), net.site_id(e.to));
      if (relaxed.link_edges.count(key) || paths_on_edge[ei].empty()) continue;
      MilpRow row{ConstraintClass::LinkCap, key,
                  "linkcap_" + sanitize(net.site_id(e.from)) + "_" + sanitize(net.site_id(e.to)),
                  RowSense::LessEq, e.capacity_gbps, {}};
      for (int pv : paths_on_edge[ei]) row.terms.push_back({path_col(pv), 1.0});
      inst.rows.push_back(std::move(row));
    }
  }
  // One balance row per traffic-carrying (workload, candidate source) pair.
  // With no admissible path the row degenerates to -rho * x = 0, which forces
  // the candidate off.
  for (int k = 0; k < m; ++k) {
    const Workload& w = workloads[k];
    if (w.traffic_gbps <= 0.0) continue;
    for (int src : inst.candidates[k]) {
      if (src == dest_of[k]) continue;
      MilpRow row{ConstraintClass::FlowBalance, w.id,
                  "flow_s" + sanitize(net.site_id(src)) + "_w" + sanitize(w.id),
                  RowSense::Equal, 0.0, {}};
      auto pit = paths_of.find({k, src});
      if (pit != paths_of.end())
        for (int pv : pit->second) row.terms.push_back({path_col(pv), 1.0});
      row.terms.push_back({xidx[{src, k}], -w.traffic_gbps});
      inst.rows.push_back(std::move(row));
    }
  }
  return inst;
}

MilpInstance add_nogood_cut(const MilpInstance& inst, const std::map<WorkloadId, SiteId>& pattern) {
  if (pattern.empty()) throw std::invalid_argument("no-good pattern is empty");
  MilpInstance out = inst;
  out.nogood_patterns.push_back(pattern);
  MilpRow row{ConstraintClass::NoGood, std::to_string(out.nogood_patterns.size()),
              "nogood_" + std::to_string(out.nogood_patterns.size()), RowSense::LessEq,
              static_cast<double>(pattern.size()) - 1.0, {}};
  std::map<WorkloadId, int> wl_index;
  for (int k = 0; k < static_cast<int>(out.workloads.size()); ++k)
    wl_index[out.workloads[k].id] = k;
  for (const auto& [wl, site] : pattern) {
    auto wit = wl_index.find(wl);
    if (wit == wl_index.end()) throw std::invalid_argument("no-good pattern names unknown workload '" + wl + "'");
    int si = out.net.site_index(site);
    if (si < 0) throw std::invalid_argument("no-good pattern names unknown site '" + site + "'");
    int x = out.x_index(si, wit->second);
    // Gate-fixed pairs can never be 1; the row stays valid without the term.
    if (x >= 0) row.terms.push_back({x, 1.0});
  }
  out.rows.push_back(std::move(row));
  return out;
}

}  // namespace sovor
