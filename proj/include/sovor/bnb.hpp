#pragma once
// Branch-and-bound over the placement binaries, bounded by the LP relaxation.
//
// Best-first on the relaxation bound with deeper-first tiebreaks, so identical
// inputs explore identical trees. Root rounds of extended cover cuts tighten
// the relaxation; branching splits the most undecided workload's candidate
// set by LP mass, falling back to single binaries; a greedy warm start,
// capacity-aware rounding probes and LP-guided dives supply incumbents early;
// root reduced costs fix binaries globally as the incumbent improves.
//
// With rel_gap = 0 nodes are pruned at incumbent - 1e-9: alternate optima may
// be cut, the optimal value never is. A positive rel_gap prunes at
// incumbent - rel_gap * |incumbent| and declares Optimal at that tolerance,
// reporting the true remaining gap; capacity plateaus that are subset-sum
// bands stop in a handful of nodes instead of enumerating every packing.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sovor/formulation.hpp"

namespace sovor {

enum class SolveStatus { Optimal, Infeasible, Timeout };

const char* to_string(SolveStatus s);

struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<Placement> placement;  // best incumbent found, if any
  double objective = 0.0;              // incumbent objective (inf when none)
  double bound = 0.0;                  // proven lower bound
  double gap = 0.0;                    // (objective - bound) / max(1, |objective|)
  long nodes = 0;                      // tree nodes or enumerated assignments priced
  double wall_seconds = 0.0;
  std::vector<std::string> root_groups;  // labeled constraint groups when infeasible
};

inline constexpr double kIntegralityTol = 1e-6;

struct SolveParams {
  double budget_seconds = 0.0;  // <= 0 means unlimited
  double rel_gap = 0.0;         // declare Optimal within this relative gap
};

// Solve within a wall-clock budget. Timeout downgrades the status and
// reports the incumbent with its gap.
SolveOutcome solve(const MilpInstance& inst, const SolveParams& params);
SolveOutcome solve(const MilpInstance& inst, double budget_seconds = 0.0);

// Exhaustive reference solver: enumerates every assignment over the gated
// candidate sets and prices routing with the LP pinned to each one. Guarded
// to <= 1e6 combinations (throws std::invalid_argument beyond that).
SolveOutcome brute_force(const MilpInstance& inst);

// Placement (assignment, routed paths, per-arc flows, resource rates and
// transition carbon) read off an LP solution whose binaries are integral.
Placement placement_from_solution(const MilpInstance& inst, const std::vector<double>& x,
                                  double objective);

}  // namespace sovor
