#pragma once
// Independent full-constraint verification of a placement against the raw
// domain data. Never consults MilpInstance rows, so solver and verifier
// cannot share a formulation bug.

#include <string>
#include <vector>

#include "sovor/domain.hpp"
#include "sovor/formulation.hpp"

namespace sovor {

struct VerifyReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Checks, in order: every workload assigned to an existing site; carbon
// eligibility of chosen sites; per-site water and power caps; portability of
// any move from the incumbent; per-workload path decomposition (real links,
// simple, within the migration-tightened budget, weights summing to the
// demand); consistency of per-arc flows with the decomposition; node-wise
// flow conservation; and per-link capacity.
VerifyReport verify_placement(const TelemetrySnapshot& snap,
                              const std::vector<Workload>& workloads, const Placement& placement,
                              const BuildConfig& config);

}  // namespace sovor
