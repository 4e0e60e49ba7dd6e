#include "sovor/fsor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "sovor/routing.hpp"
#include "sovor/verify.hpp"

namespace sovor {

namespace {

// Rebuild an instance with a wider relaxation while carrying its no-good cuts.
MilpInstance rebuild(const MilpInstance& src, const Relaxation& relax) {
  MilpInstance out = build_instance(src.snapshot, src.workloads, src.config, relax);
  for (const auto& pattern : src.nogood_patterns) out = add_nogood_cut(out, pattern);
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ", ";
    out += p;
  }
  return out;
}

}  // namespace

Membership fsor_contains(const TelemetrySnapshot& snap, const std::vector<Workload>& set,
                         const BuildConfig& config) {
  MilpInstance inst = build_instance(snap, set, config);
  SolveOutcome outcome = solve(inst);
  Membership m;
  m.member = outcome.status == SolveStatus::Optimal;
  if (m.member) {
    VerifyReport rep = verify_placement(snap, set, *outcome.placement, config);
    if (!rep.ok())
      throw std::logic_error("membership witness failed verification: " + rep.violations.front());
    m.witness = std::move(outcome.placement);
  }
  return m;
}

SitePartition classify_green_but_far(const TelemetrySnapshot& snap, const Workload& workload) {
  Network net(snap);
  int dest = net.site_index(workload.dest);
  if (dest < 0) throw std::invalid_argument("workload '" + workload.id + "' dest site unknown");
  auto delays = shortest_delays(net);

  SitePartition part;
  for (int i = 0; i < net.num_sites(); ++i) {
    const Site& s = *snap.find_site(net.site_id(i));
    bool eligible = blended_carbon_intensity(s) <= s.carbon_ceiling_g_per_kwh &&
                    workload.power_kw <= s.power_cap_kw &&
                    s.water_intensity_l_per_kwh * workload.power_kw <= s.water_permit_l_per_h;
    if (!eligible) {
      part.ineligible.push_back(s.id);
      continue;
    }
    // Latency reach uses the raw service objective over the real graph; an
    // unbounded objective admits every reachable-or-not site, so the
    // green-but-far set is empty for delay-tolerant work.
    bool within = workload.latency_slo.admits(delays[i][dest]);
    (within ? part.interior : part.green_but_far).push_back(s.id);
  }
  return part;
}

FsorReport enumerate_fsor(const TelemetrySnapshot& snap, const std::vector<Workload>& universe,
                          const BuildConfig& config, std::size_t limit) {
  if (universe.size() > limit || universe.size() > 31)
    throw std::invalid_argument("universe of " + std::to_string(universe.size()) +
                                " workloads exceeds the enumeration guard of " +
                                std::to_string(std::min<std::size_t>(limit, 31)) +
                                "; query fsor_contains for individual sets instead");

  const int u = static_cast<int>(universe.size());
  FsorReport report;
  for (const auto& w : universe) report.universe.push_back(w.id);

  auto subset_of = [&](unsigned mask) {
    std::vector<Workload> out;
    for (int j = 0; j < u; ++j)
      if (mask & (1u << j)) out.push_back(universe[j]);
    return out;
  };
  auto ids_of = [&](unsigned mask) {
    std::vector<WorkloadId> out;
    for (int j = 0; j < u; ++j)
      if (mask & (1u << j)) out.push_back(universe[j].id);
    return out;
  };

  const unsigned full = u == 0 ? 0u : (1u << u) - 1u;
  std::vector<char> feasible(full + 1u, 0);

  auto price = [&](unsigned mask) {
    bool member = fsor_contains(snap, subset_of(mask), config).member;
    report.queried.push_back({ids_of(mask), member});
    return member;
  };

  feasible[0] = price(0) ? 1 : 0;  // the empty set prices trivially feasible
  if (u > 0) {
    if (price(full)) {
      // Downward closure: one feasible universe settles every subset.
      for (unsigned mask = 0; mask <= full; ++mask) feasible[mask] = 1;
    } else {
      // Bottom-up by size; an infeasible set condemns all of its supersets.
      std::vector<unsigned> order;
      for (unsigned mask = 1; mask < full; ++mask) order.push_back(mask);
      std::stable_sort(order.begin(), order.end(), [](unsigned a, unsigned b) {
        int pa = std::popcount(a), pb = std::popcount(b);
        return pa != pb ? pa < pb : a < b;
      });
      std::vector<unsigned> condemned;
      for (unsigned mask : order) {
        bool pruned = false;
        for (unsigned bad : condemned)
          if ((bad & mask) == bad) {
            pruned = true;
            break;
          }
        if (pruned) continue;
        if (price(mask))
          feasible[mask] = 1;
        else
          condemned.push_back(mask);
      }
    }
  }

  for (unsigned mask = 0; mask <= full; ++mask) {
    if (!feasible[mask]) continue;
    bool maximal = true;
    for (int j = 0; j < u && maximal; ++j)
      if (!(mask & (1u << j)) && feasible[mask | (1u << j)]) maximal = false;
    if (maximal) report.maximal_sets.push_back(ids_of(mask));
  }

  // Admissibility and reach from the full-universe instance: candidate sets
  // are exactly the gate-surviving sites per workload.
  MilpInstance inst = build_instance(snap, universe, config);
  std::map<WorkloadClass, std::set<int>> per_class;
  for (int k = 0; k < u; ++k)
    per_class[universe[k].wl_class].insert(inst.candidates[k].begin(), inst.candidates[k].end());
  for (const auto& [cls, sites] : per_class)
    report.class_admissible_sites[cls] = static_cast<int>(sites.size());
  for (const auto& w : universe)
    if (!w.latency_slo.is_unbounded())
      report.green_but_far[w.id] = classify_green_but_far(snap, w).green_but_far;
  return report;
}

InfeasibilityCertificate extract_iis(const MilpInstance& inst, double budget_seconds) {
  SolveOutcome root = solve(inst, budget_seconds);
  if (root.status == SolveStatus::Optimal)
    throw std::invalid_argument("instance is feasible; there is nothing to certify");
  if (root.status == SolveStatus::Timeout)
    throw std::runtime_error("solve budget exhausted before infeasibility was certified");

  // Deletion filter: drop each group once, in canonical order. A drop that
  // keeps the instance infeasible is made permanent; one that restores
  // feasibility marks the group as essential.
  Relaxation relax = inst.relaxed;
  std::vector<GroupId> kept;
  for (const GroupId& g : inst.groups()) {
    Relaxation trial = relax;
    trial.drop(g);
    SolveOutcome o = solve(rebuild(inst, trial), budget_seconds);
    if (o.status == SolveStatus::Timeout)
      throw std::runtime_error("solve budget exhausted while filtering group " + g.label());
    if (o.status == SolveStatus::Infeasible)
      relax = std::move(trial);
    else
      kept.push_back(g);
  }

  InfeasibilityCertificate cert;
  cert.groups = std::move(kept);

  std::map<ConstraintClass, std::vector<std::string>> keys;
  for (const auto& g : cert.groups) keys[g.cls].push_back(g.key);
  std::ostringstream d;
  if (keys.count(ConstraintClass::CarbonGate))
    d << "carbon eligibility: " << join(keys[ConstraintClass::CarbonGate])
      << " exceed their intensity ceilings; procure cleaner supply or revisit the ceiling.\n";
  if (keys.count(ConstraintClass::WaterCap))
    d << "water headroom: permits at " << join(keys[ConstraintClass::WaterCap])
      << " cap the feasible load; expand permits or improve cooling efficiency.\n";
  if (keys.count(ConstraintClass::PowerCap))
    d << "power headroom: provisioned power at " << join(keys[ConstraintClass::PowerCap])
      << " caps the feasible load; add feed or battery capacity.\n";
  if (keys.count(ConstraintClass::LatencyGate))
    d << "latency admissibility: " << join(keys[ConstraintClass::LatencyGate])
      << " cannot reach any eligible site in budget; relax the objective or add closer capacity.\n";
  if (keys.count(ConstraintClass::LinkCap))
    d << "network capacity: " << join(keys[ConstraintClass::LinkCap])
      << " saturate under the required routing; add or upgrade links.\n";
  if (keys.count(ConstraintClass::Assignment))
    d << "demand: " << join(keys[ConstraintClass::Assignment])
      << " must be placed, and no eligible combination remains; shed or defer.\n";
  cert.diagnosis = d.str();
  return cert;
}

nlohmann::json to_json(const InfeasibilityCertificate& cert) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : cert.groups)
    groups.push_back({{"class", to_string(g.cls)}, {"key", g.key}, {"label", g.label()}});
  return {{"groups", groups}, {"diagnosis", cert.diagnosis}};
}

nlohmann::json to_json(const FsorReport& report) {
  nlohmann::json queried = nlohmann::json::array();
  for (const auto& [set, member] : report.queried)
    queried.push_back({{"set", set}, {"member", member}});
  nlohmann::json classes = nlohmann::json::object();
  for (const auto& [cls, count] : report.class_admissible_sites)
    classes[to_string(cls)] = count;
  nlohmann::json gbf = nlohmann::json::object();
  for (const auto& [wid, sites] : report.green_but_far) gbf[wid] = sites;
  return {{"universe", report.universe},
          {"queried", queried},
          {"maximal_sets", report.maximal_sets},
          {"class_admissible_sites", classes},
          {"green_but_far", gbf}};
}

}  // namespace sovor
