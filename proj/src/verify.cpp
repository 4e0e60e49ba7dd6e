#include "sovor/verify.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include "sovor/routing.hpp"

namespace sovor {

namespace {

constexpr double kTol = 1e-6;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

VerifyReport verify_placement(const TelemetrySnapshot& snap,
                              const std::vector<Workload>& workloads, const Placement& placement,
                              const BuildConfig& config) {
  VerifyReport rep;
  auto fail = [&](const std::string& msg) { rep.violations.push_back(msg); };

  Network net(snap);

  // Assignment completeness and carbon eligibility.
  std::map<SiteId, double> site_power;
  for (const auto& w : workloads) {
    auto it = placement.assignment.find(w.id);
    if (it == placement.assignment.end()) {
      fail("workload '" + w.id + "' is unassigned");
      continue;
    }
    const Site* site = snap.find_site(it->second);
    if (!site) {
      fail("workload '" + w.id + "' assigned to unknown site '" + it->second + "'");
      continue;
    }
    site_power[site->id] += w.power_kw;
    double gamma_eff = blended_carbon_intensity(*site);
    if (gamma_eff > site->carbon_ceiling_g_per_kwh + kTol &&
        config.objective_mode == ObjectiveMode::Environmental)
      fail("site '" + site->id + "' is carbon-ineligible (" + fmt(gamma_eff) + " > " +
           fmt(site->carbon_ceiling_g_per_kwh) + ") but hosts '" + w.id + "'");
  }

  // Site caps.
  for (const auto& s : snap.sites) {
    double p = site_power.count(s.id) ? site_power[s.id] : 0.0;
    if (p > s.power_cap_kw + kTol * std::max(1.0, s.power_cap_kw))
      fail("site '" + s.id + "' power " + fmt(p) + " kW exceeds cap " + fmt(s.power_cap_kw));
    double water = s.water_intensity_l_per_kwh * p;
    if (water > s.water_permit_l_per_h + kTol * std::max(1.0, s.water_permit_l_per_h))
      fail("site '" + s.id + "' water " + fmt(water) + " L/h exceeds permit " +
           fmt(s.water_permit_l_per_h));
  }

  // Moves, latency and flows.
  std::map<EdgeKey, double> link_load;
  for (const auto& w : workloads) {
    auto it = placement.assignment.find(w.id);
    if (it == placement.assignment.end()) continue;
    const SiteId& site = it->second;
    if (net.site_index(site) < 0) continue;

    SiteId source = site;
    if (config.incumbent) {
      auto inc = config.incumbent->assignment.find(w.id);
      if (inc != config.incumbent->assignment.end()) source = inc->second;
    }
    if (source != site && !w.portable) {
      fail("non-portable workload '" + w.id + "' moved from '" + source + "' to '" + site + "'");
      continue;
    }
    std::optional<LatencyBudget> budget;
    if (config.latency_as_zero)
      budget = LatencyBudget::unbounded();
    else
      budget = effective_latency_budget(w, source, site, snap);
    if (!budget) {
      fail("workload '" + w.id + "' at '" + site + "' has no remaining latency budget");
      continue;
    }

    auto pit = placement.paths.find(w.id);
    const std::vector<WeightedPath> no_paths;
    const std::vector<WeightedPath>& paths = pit == placement.paths.end() ? no_paths : pit->second;

    if (w.traffic_gbps <= 0.0 || site == w.dest) {
      // No network flow required; the serving latency is the shortest delay.
      if (w.traffic_gbps <= 0.0 && site != w.dest && !config.latency_as_zero) {
        auto delays = shortest_delays(net);
        int si = net.site_index(site), di = net.site_index(w.dest);
        if (di < 0)
          fail("workload '" + w.id + "' has unknown dest '" + w.dest + "'");
        else if (!budget->admits(delays[si][di]))
          fail("workload '" + w.id + "' at '" + site + "' violates its latency budget (" +
               fmt(delays[si][di]) + " ms)");
      }
      continue;
    }

    double total = 0.0;
    std::map<EdgeKey, double> from_paths;
    for (const auto& wp : paths) {
      if (wp.weight_gbps < -1e-9) {
        fail("workload '" + w.id + "' has a negative path weight");
        continue;
      }
      if (wp.nodes.empty() || wp.nodes.front() != site || wp.nodes.back() != w.dest) {
        fail("workload '" + w.id + "' path does not run from '" + site + "' to '" + w.dest + "'");
        continue;
      }
      std::set<SiteId> seen(wp.nodes.begin(), wp.nodes.end());
      if (seen.size() != wp.nodes.size()) fail("workload '" + w.id + "' path revisits a node");
      double delay = 0.0;
      bool broken = false;
      for (size_t i = 0; i + 1 < wp.nodes.size(); ++i) {
        const Link* l = snap.find_link(wp.nodes[i], wp.nodes[i + 1]);
        if (!l || l->alarmed) {
          fail("workload '" + w.id + "' path uses missing or alarmed link " + wp.nodes[i] +
               "->" + wp.nodes[i + 1]);
          broken = true;
          break;
        }
        delay += l->delay_ms;
        from_paths[{wp.nodes[i], wp.nodes[i + 1]}] += wp.weight_gbps;
      }
      if (broken) continue;
      if (!config.latency_as_zero && !budget->admits(delay))
        fail("workload '" + w.id + "' path delay " + fmt(delay) + " ms exceeds budget");
      total += wp.weight_gbps;
    }
    if (std::fabs(total - w.traffic_gbps) > kTol * std::max(1.0, w.traffic_gbps))
      fail("workload '" + w.id + "' path weights sum to " + fmt(total) + ", demand is " +
           fmt(w.traffic_gbps));

    // Declared flows must match the decomposition and conserve at every node.
    auto fit = placement.flows.find(w.id);
    std::map<EdgeKey, double> declared = fit == placement.flows.end()
                                             ? std::map<EdgeKey, double>{}
                                             : fit->second;
    for (const auto& [edge, f] : from_paths)
      if (std::fabs(f - (declared.count(edge) ? declared[edge] : 0.0)) > kTol)
        fail("workload '" + w.id + "' declared flow on " + edge.first + "->" + edge.second +
             " disagrees with its paths");
    std::map<SiteId, double> net_out;
    for (const auto& [edge, f] : declared) {
      if (f < -1e-9) fail("workload '" + w.id + "' has negative flow on " + edge.first + "->" + edge.second);
      net_out[edge.first] += f;
      net_out[edge.second] -= f;
      link_load[edge] += f;
    }
    for (const auto& s : snap.sites) {
      double expect = 0.0;
      if (s.id == site) expect += w.traffic_gbps;
      if (s.id == w.dest) expect -= w.traffic_gbps;
      double got = net_out.count(s.id) ? net_out[s.id] : 0.0;
      if (std::fabs(got - expect) > kTol * std::max(1.0, w.traffic_gbps))
        fail("workload '" + w.id + "' violates flow conservation at '" + s.id + "' (" + fmt(got) +
             " vs " + fmt(expect) + ")");
    }
  }

  if (!config.uncap_links) {
    for (const auto& l : snap.links) {
      auto it = link_load.find({l.from, l.to});
      if (it == link_load.end()) continue;
      if (it->second > l.capacity_gbps + kTol * std::max(1.0, l.capacity_gbps))
        fail("link " + l.from + "->" + l.to + " carries " + fmt(it->second) + " Gbps over capacity " +
             fmt(l.capacity_gbps));
    }
  }
  return rep;
}

}  // namespace sovor
