#pragma once
// Feasibility-region analytics: membership queries over workload sets, exact
// enumeration of the downward-closed feasible family (stored as its maximal
// antichain), per-class admissibility, the green-but-far site partition, and
// infeasibility certificates extracted by deletion filtering over labeled
// constraint groups.

#include <json.hpp>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sovor/bnb.hpp"
#include "sovor/formulation.hpp"

namespace sovor {

struct Membership {
  bool member = false;
  std::optional<Placement> witness;  // verified placement when member
};

// True iff some placement+routing serves every workload in `set` under the
// snapshot. The witness is independently re-verified before it is returned.
Membership fsor_contains(const TelemetrySnapshot& snap, const std::vector<Workload>& set,
                         const BuildConfig& config = {});

// Sites for one workload, split by what excludes them. Interior sites pass
// the sustainability gates and sit within the latency reach; green-but-far
// sites are sustainability-eligible but beyond the reach; the rest are
// ineligible outright.
struct SitePartition {
  std::vector<SiteId> interior;
  std::vector<SiteId> green_but_far;
  std::vector<SiteId> ineligible;
};

SitePartition classify_green_but_far(const TelemetrySnapshot& snap, const Workload& workload);

struct FsorReport {
  std::vector<WorkloadId> universe;  // id order used by the sets below
  // Subsets actually priced during enumeration, with their verdicts.
  std::vector<std::pair<std::vector<WorkloadId>, bool>> queried;
  // Canonical antichain: every feasible set is a subset of one of these.
  std::vector<std::vector<WorkloadId>> maximal_sets;
  // Sites admissible to at least one universe workload of the class.
  std::map<WorkloadClass, int> class_admissible_sites;
  // Per latency-bounded workload: eligible sites beyond its latency reach.
  std::map<WorkloadId, std::vector<SiteId>> green_but_far;
};

// Exact feasible family over every subset of `universe`, with monotone
// pruning (an infeasible set condemns all supersets). Guarded: throws
// std::invalid_argument when |universe| > limit, suggesting membership
// queries instead.
FsorReport enumerate_fsor(const TelemetrySnapshot& snap, const std::vector<Workload>& universe,
                          const BuildConfig& config = {}, std::size_t limit = 15);

struct InfeasibilityCertificate {
  std::vector<GroupId> groups;  // minimal: dropping any one restores feasibility
  std::string diagnosis;        // operator-facing text keyed to investment levers
};

// Deletion filter over the instance's labeled groups, in the canonical order
// CarbonGate, WaterCap, PowerCap, LatencyGate, LinkCap, Assignment. Throws
// std::invalid_argument when the instance is actually feasible and
// std::runtime_error when the per-solve budget cannot certify either way.
InfeasibilityCertificate extract_iis(const MilpInstance& inst, double budget_seconds = 0.0);

nlohmann::json to_json(const InfeasibilityCertificate& cert);
nlohmann::json to_json(const FsorReport& report);

}  // namespace sovor
