#pragma once
// Network graph utilities: delay accounting, admissible path enumeration and
// conversions between path decompositions and per-arc flows.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "sovor/domain.hpp"

namespace sovor {

inline constexpr double kSpeedOfLightKmPerS = 299792.458;
inline constexpr double kFiberRefractiveIndex = 1.468;

struct NetworkEdge {
  int from = -1;
  int to = -1;
  double capacity_gbps = 0.0;
  double delay_ms = 0.0;
  double energy_j_per_bit = 0.0;
  double utilization = 0.0;
};

// Indexed view of a snapshot's topology. Alarmed links are dropped unless
// explicitly requested; sites are indexed in sorted id order, so the same
// snapshot always yields the same indexing.
class Network {
 public:
  Network() = default;
  explicit Network(const TelemetrySnapshot& snap, bool include_alarmed = false);

  int num_sites() const { return static_cast<int>(site_ids_.size()); }
  int site_index(const SiteId& id) const;  // -1 when absent
  const SiteId& site_id(int idx) const { return site_ids_.at(idx); }
  const std::vector<SiteId>& site_ids() const { return site_ids_; }

  const std::vector<NetworkEdge>& edges() const { return edges_; }
  int edge_between(int from, int to) const;  // edge index or -1
  // Outgoing edge indices for a node, sorted by destination site id.
  const std::vector<int>& out_edges(int node) const { return out_edges_.at(node); }

 private:
  std::vector<SiteId> site_ids_;
  std::map<SiteId, int> site_index_;
  std::vector<NetworkEdge> edges_;
  std::vector<std::vector<int>> out_edges_;
  std::vector<std::vector<int>> edge_matrix_;  // -1 when absent
};

// A concrete simple path; nodes are network indices, source first, dest last.
struct Path {
  std::vector<int> nodes;
  double delay_ms = 0.0;

  bool operator==(const Path&) const = default;
};

// Sum of per-hop delays along a node sequence. Throws std::invalid_argument
// naming the hop when an edge is missing. A single-node path has zero delay.
double path_delay(const std::vector<SiteId>& nodes, const Network& net);

// All-pairs minimum one-way delay; diagonal is zero and unreachable pairs are
// +infinity.
std::vector<std::vector<double>> shortest_delays(const Network& net);

// Every simple path from src to dst whose total delay satisfies the budget and
// whose hop count is at most hop_limit, in lexicographic node-id order.
// src == dst yields the single trivial path. hop_limit must be >= 1.
std::vector<Path> enumerate_admissible_paths(const Network& net, int src, int dst,
                                             const LatencyBudget& budget, int hop_limit);

// Great-circle reach of a one-way latency budget through single-mode fiber.
// Unbounded budgets have no radius.
std::optional<double> latency_radius_km(
    const LatencyBudget& budget, double refractive_index = kFiberRefractiveIndex);

using ArcFlows = std::map<std::pair<int, int>, double>;

// Aggregates weighted paths into per-arc flows. Weights must be >= 0 and sum
// to rho (a trivial path at src == dst carries weight with zero arc flow).
ArcFlows paths_to_flows(const std::vector<std::pair<Path, double>>& weighted,
                        double rho, int src, int dst);

// Greedy shortest-first decomposition of an arc flow into weighted simple
// paths. Throws when the flow is negative on any arc or leaves a residual
// that is not a src->dst path flow.
std::vector<std::pair<Path, double>> flows_to_paths(const ArcFlows& flows, int src, int dst,
                                                    const Network& net);

}  // namespace sovor
