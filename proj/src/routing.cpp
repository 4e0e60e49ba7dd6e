#include "sovor/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sovor {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

Network::Network(const TelemetrySnapshot& snap, bool include_alarmed) {
  for (const auto& s : snap.sites) site_ids_.push_back(s.id);
  std::sort(site_ids_.begin(), site_ids_.end());
  site_ids_.erase(std::unique(site_ids_.begin(), site_ids_.end()), site_ids_.end());
  for (int i = 0; i < static_cast<int>(site_ids_.size()); ++i) site_index_[site_ids_[i]] = i;

  int n = num_sites();
  edge_matrix_.assign(n, std::vector<int>(n, -1));
  out_edges_.assign(n, {});

  // Deterministic edge order: sorted by (from id, to id).
  std::vector<const Link*> links;
  for (const auto& l : snap.links)
    if (include_alarmed || !l.alarmed) links.push_back(&l);
  std::sort(links.begin(), links.end(), [](const Link* a, const Link* b) {
    return std::tie(a->from, a->to) < std::tie(b->from, b->to);
  });
  for (const Link* l : links) {
    auto fi = site_index_.find(l->from);
    auto ti = site_index_.find(l->to);
    if (fi == site_index_.end() || ti == site_index_.end())
      throw std::invalid_argument("link " + l->from + "->" + l->to + " references unknown site");
    NetworkEdge e;
    e.from = fi->second;
    e.to = ti->second;
    e.capacity_gbps = l->capacity_gbps;
    e.delay_ms = l->delay_ms;
    e.energy_j_per_bit = l->energy_j_per_bit;
    e.utilization = l->utilization;
    if (edge_matrix_[e.from][e.to] != -1)
      throw std::invalid_argument("duplicate link " + l->from + "->" + l->to);
    edge_matrix_[e.from][e.to] = static_cast<int>(edges_.size());
    out_edges_[e.from].push_back(static_cast<int>(edges_.size()));
    edges_.push_back(e);
  }
}

int Network::site_index(const SiteId& id) const {
  auto it = site_index_.find(id);
  return it == site_index_.end() ? -1 : it->second;
}

int Network::edge_between(int from, int to) const {
  if (from < 0 || to < 0 || from >= num_sites() || to >= num_sites()) return -1;
  return edge_matrix_[from][to];
}

double path_delay(const std::vector<SiteId>& nodes, const Network& net) {
  if (nodes.empty()) throw std::invalid_argument("path has no nodes");
  double total = 0.0;
  for (size_t i = 0; i + 1 < nodes.size(); ++i) {
    int a = net.site_index(nodes[i]);
    int b = net.site_index(nodes[i + 1]);
    if (a < 0 || b < 0 || net.edge_between(a, b) < 0)
      throw std::invalid_argument("no link for hop " + nodes[i] + "->" + nodes[i + 1]);
    total += net.edges()[net.edge_between(a, b)].delay_ms;
  }
  return total;
}

std::vector<std::vector<double>> shortest_delays(const Network& net) {
  int n = net.num_sites();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, kInf));
  for (int i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : net.edges()) d[e.from][e.to] = std::min(d[e.from][e.to], e.delay_ms);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (d[i][k] == kInf) continue;
      for (int j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    }
  return d;
}

namespace {

void enumerate_rec(const Network& net, int node, int dst, const LatencyBudget& budget,
                   int hop_limit, std::vector<int>& stack, std::vector<char>& visited,
                   double delay, std::vector<Path>& out) {
  if (node == dst) {
    out.push_back(Path{stack, delay});
    return;
  }
  if (static_cast<int>(stack.size()) - 1 >= hop_limit) return;
  for (int ei : net.out_edges(node)) {
    const NetworkEdge& e = net.edges()[ei];
    if (visited[e.to]) continue;
    double next = delay + e.delay_ms;
    if (!budget.admits(next)) continue;
    visited[e.to] = 1;
    stack.push_back(e.to);
    enumerate_rec(net, e.to, dst, budget, hop_limit, stack, visited, next, out);
    stack.pop_back();
    visited[e.to] = 0;
  }
}

}  // namespace

std::vector<Path> enumerate_admissible_paths(const Network& net, int src, int dst,
                                             const LatencyBudget& budget, int hop_limit) {
  if (hop_limit < 1) throw std::invalid_argument("hop_limit must be >= 1");
  if (src < 0 || dst < 0 || src >= net.num_sites() || dst >= net.num_sites())
    throw std::invalid_argument("path endpoint out of range");
  std::vector<Path> out;
  std::vector<int> stack{src};
  std::vector<char> visited(net.num_sites(), 0);
  visited[src] = 1;
  enumerate_rec(net, src, dst, budget, hop_limit, stack, visited, 0.0, out);
  return out;
}

std::optional<double> latency_radius_km(const LatencyBudget& budget, double refractive_index) {
  if (budget.is_unbounded()) return std::nullopt;
  if (!(refractive_index >= 1.0)) throw std::invalid_argument("refractive index must be >= 1");
  return budget.ms() * 1e-3 * kSpeedOfLightKmPerS / refractive_index;
}

ArcFlows paths_to_flows(const std::vector<std::pair<Path, double>>& weighted, double rho,
                        int src, int dst) {
  ArcFlows flows;
  double total = 0.0;
  for (const auto& [path, w] : weighted) {
    if (w < -1e-12) throw std::invalid_argument("negative path weight");
    if (path.nodes.empty() || path.nodes.front() != src || path.nodes.back() != dst)
      throw std::invalid_argument("path does not run from source to dest");
    total += w;
    for (size_t i = 0; i + 1 < path.nodes.size(); ++i)
      flows[{path.nodes[i], path.nodes[i + 1]}] += w;
  }
  if (std::fabs(total - rho) > 1e-7 * std::max(1.0, std::fabs(rho)))
    throw std::invalid_argument("path weights do not sum to the demand");
  return flows;
}

std::vector<std::pair<Path, double>> flows_to_paths(const ArcFlows& flows, int src, int dst,
                                                    const Network& net) {
  constexpr double kEps = 1e-9;
  ArcFlows residual;
  for (const auto& [arc, f] : flows) {
    if (f < -kEps) throw std::invalid_argument("negative arc flow");
    if (f > kEps) residual[arc] = f;
  }
  std::vector<std::pair<Path, double>> out;
  int n = net.num_sites();
  while (true) {
    // Shortest-delay path from src to dst within the residual support.
    std::vector<double> dist(n, kInf);
    std::vector<int> prev(n, -1);
    dist[src] = 0.0;
    std::vector<char> done(n, 0);
    for (int iter = 0; iter < n; ++iter) {
      int u = -1;
      double best = kInf;
      for (int i = 0; i < n; ++i)
        if (!done[i] && dist[i] < best) best = dist[i], u = i;
      if (u < 0) break;
      done[u] = 1;
      for (int ei : net.out_edges(u)) {
        const NetworkEdge& e = net.edges()[ei];
        auto it = residual.find({u, e.to});
        if (it == residual.end() || it->second <= kEps) continue;
        if (dist[u] + e.delay_ms < dist[e.to]) {
          dist[e.to] = dist[u] + e.delay_ms;
          prev[e.to] = u;
        }
      }
    }
    if (dist[dst] == kInf || src == dst) break;
    std::vector<int> nodes;
    for (int v = dst; v != -1; v = prev[v]) nodes.push_back(v);
    std::reverse(nodes.begin(), nodes.end());
    double bottleneck = kInf;
    for (size_t i = 0; i + 1 < nodes.size(); ++i)
      bottleneck = std::min(bottleneck, residual[{nodes[i], nodes[i + 1]}]);
    for (size_t i = 0; i + 1 < nodes.size(); ++i) {
      auto it = residual.find({nodes[i], nodes[i + 1]});
      it->second -= bottleneck;
      if (it->second <= kEps) residual.erase(it);
    }
    out.push_back({Path{nodes, dist[dst]}, bottleneck});
  }
  for (const auto& [arc, f] : residual)
    if (f > 1e-6)
      throw std::invalid_argument("flow is not a source->dest path flow: residual on arc " +
                                  net.site_id(arc.first) + "->" + net.site_id(arc.second));
  return out;
}

}  // namespace sovor
