#include "sovor/bnb.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <queue>
#include <stdexcept>

#include "sovor/lp.hpp"
#include "sovor/routing.hpp"

namespace sovor {

namespace {

constexpr double kPruneSlack = 1e-9;  // prune nodes bounded above incumbent - this
constexpr double kPathEps = 1e-9;     // path weights below this are solver noise
constexpr double kInfty = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double elapsed_seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Node {
  long id = 0;
  int depth = 0;
  double priority = -kInfty;     // parent relaxation bound
  std::vector<signed char> fix;  // per binary: -1 free, else pinned value
};

// Min-heap on (priority, depth, id): equal bounds dive deepest-first so
// plateaus of tied bounds resolve toward integral leaves instead of
// spreading breadth-first.
struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.priority != b.priority) return a.priority > b.priority;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

// A node fix conflicting with a root reduced-cost fix leaves the LP with
// crossed bounds, which prices as Infeasible and prunes the subtree.
void apply_fixes(const MilpInstance& inst, const std::vector<signed char>& fix,
                 const std::vector<signed char>& root_fix, LpProblem& lp) {
  for (int b = 0; b < inst.num_binaries(); ++b) {
    signed char f = fix[b], r = root_fix[b];
    if (f < 0 && r < 0) {
      lp.lower[b] = 0.0;
      lp.upper[b] = 1.0;
    } else if (f >= 0 && r >= 0 && f != r) {
      lp.lower[b] = 1.0;
      lp.upper[b] = 0.0;
    } else {
      lp.lower[b] = lp.upper[b] = static_cast<double>(f >= 0 ? f : r);
    }
  }
}

bool integral(const MilpInstance& inst, const std::vector<double>& x) {
  for (int b = 0; b < inst.num_binaries(); ++b)
    if (std::fabs(x[b] - std::round(x[b])) > kIntegralityTol) return false;
  return true;
}

// Fractionality weighted by objective coefficient: settle the expensive
// decisions first. Ties resolve to the lowest index, which is the
// (site, workload) variable order.
int branch_variable(const MilpInstance& inst, const std::vector<double>& x) {
  int best = -1;
  double best_score = 0.0;
  for (int b = 0; b < inst.num_binaries(); ++b) {
    double dist = std::min(x[b], 1.0 - x[b]);
    if (dist <= kIntegralityTol) continue;
    double score = dist * (1e-6 + std::fabs(inst.obj_binaries[b]));
    if (score > best_score) {
      best_score = score;
      best = b;
    }
  }
  return best;
}

// Assignment-row branching: split the most undecided workload's allowed
// candidate sites into two halves by LP mass and forbid one half per child.
// Unlike pinning a single binary to 0, both children displace real mass, so
// plateaus of near-tied sites resolve in log(sites) levels per workload.
struct SosBranch {
  int workload = -1;
  std::vector<int> forbid_a;  // binaries forbidden in the first child
  std::vector<int> forbid_b;  // binaries forbidden in the second child
};

SosBranch sos_branch(const MilpInstance& inst, const std::vector<signed char>& fix,
                     const std::vector<signed char>& root_fix, const std::vector<double>& x) {
  SosBranch out;
  const int m = static_cast<int>(inst.workloads.size());
  double best_score = kIntegralityTol;
  for (int k = 0; k < m; ++k) {
    double mass = 0.0, lead = 0.0, cost = 0.0;
    int allowed = 0;
    bool pinned = false;
    for (int i : inst.candidates[k]) {
      int b = inst.x_index(i, k);
      if (fix[b] == 1) {
        pinned = true;
        break;
      }
      if (fix[b] == 0 || root_fix[b] == 0) continue;
      ++allowed;
      mass += x[b];
      lead = std::max(lead, x[b]);
      cost = std::max(cost, std::fabs(inst.obj_binaries[b]));
    }
    if (pinned || allowed < 2) continue;
    double score = (mass - lead) * (1e-6 + cost);  // mass off the leading site
    if (score > best_score) {
      best_score = score;
      out.workload = k;
    }
  }
  if (out.workload < 0) return out;

  std::vector<std::pair<double, int>> ranked;  // (-x, binary) for stable order
  double total = 0.0;
  for (int i : inst.candidates[out.workload]) {
    int b = inst.x_index(i, out.workload);
    if (fix[b] == 0 || root_fix[b] == 0) continue;
    ranked.push_back({-x[b], b});
    total += x[b];
  }
  std::sort(ranked.begin(), ranked.end());
  double cum = 0.0;
  size_t cut = 0;
  while (cut + 1 < ranked.size() && (cut == 0 || cum < 0.5 * total))
    cum += -ranked[cut++].first;
  for (size_t i = 0; i < ranked.size(); ++i)
    (i < cut ? out.forbid_b : out.forbid_a).push_back(ranked[i].second);
  return out;
}

struct Incumbent {
  bool found = false;
  double objective = kInfty;
  std::vector<double> x;
};

void offer(Incumbent& inc, double objective, const std::vector<double>& x) {
  if (!inc.found || objective < inc.objective - 1e-12) {
    inc.found = true;
    inc.objective = objective;
    inc.x = x;
  }
}

// Price the LP with every binary pinned to `site_for` (-1 pins a workload's
// whole column group to zero) and offer the result as an incumbent.
void try_pinned(const MilpInstance& inst, const LpProblem& base, const std::vector<int>& site_for,
                Incumbent& inc) {
  LpProblem lp = base;
  for (int b = 0; b < inst.num_binaries(); ++b) {
    double v = site_for[inst.binaries[b].workload] == inst.binaries[b].site ? 1.0 : 0.0;
    lp.lower[b] = lp.upper[b] = v;
  }
  LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Optimal) offer(inc, res.objective, res.x);
}

bool assignment_required(const MilpInstance& inst, int k) {
  return inst.relaxed.assignment_workloads.count(inst.workloads[k].id) == 0;
}

struct CapacityLedger {
  std::vector<double> power, water;

  explicit CapacityLedger(const MilpInstance& inst) {
    const int n = inst.net.num_sites();
    power.assign(n, 0.0);
    water.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const Site& s = *inst.snapshot.find_site(inst.net.site_id(i));
      power[i] = inst.relaxed.power_sites.count(s.id) ? kInfty : s.power_cap_kw;
      water[i] = inst.relaxed.water_sites.count(s.id) ? kInfty : s.water_permit_l_per_h;
    }
  }

  bool fits(const MilpInstance& inst, int k, int i) const {
    const Workload& w = inst.workloads[k];
    const Site& s = *inst.snapshot.find_site(inst.net.site_id(i));
    return w.power_kw <= power[i] + 1e-9 &&
           s.water_intensity_l_per_kwh * w.power_kw <= water[i] + 1e-9;
  }

  void book(const MilpInstance& inst, int k, int i) {
    const Workload& w = inst.workloads[k];
    const Site& s = *inst.snapshot.find_site(inst.net.site_id(i));
    power[i] -= w.power_kw;
    water[i] -= s.water_intensity_l_per_kwh * w.power_kw;
  }
};

// Workloads in first-fit-decreasing order by power; big items pack worst.
std::vector<int> ffd_order(const MilpInstance& inst) {
  std::vector<int> order(inst.workloads.size());
  for (size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return inst.workloads[a].power_kw > inst.workloads[b].power_kw;
  });
  return order;
}

// Cheapest-fitting-candidate sweep against running capacity residuals, big
// workloads first. The pinned LP afterwards decides whether the picks route.
void greedy_incumbent(const MilpInstance& inst, const LpProblem& base, Incumbent& inc) {
  const int m = static_cast<int>(inst.workloads.size());
  CapacityLedger ledger(inst);
  std::vector<int> site_for(m, -1);
  for (int k : ffd_order(inst)) {
    if (!assignment_required(inst, k)) continue;  // shedding is never pricier
    int best = -1, best_fit = -1;
    double best_cost = 0.0, best_fit_cost = 0.0;
    for (int i : inst.candidates[k]) {
      double cost = inst.obj_binaries[inst.x_index(i, k)];
      if (best < 0 || cost < best_cost) best = i, best_cost = cost;
      if (ledger.fits(inst, k, i) && (best_fit < 0 || cost < best_fit_cost))
        best_fit = i, best_fit_cost = cost;
    }
    if (best_fit >= 0) best = best_fit;
    if (best < 0) return;  // no candidate at all; leave it to the tree
    site_for[k] = best;
    ledger.book(inst, k, best);
  }
  try_pinned(inst, base, site_for, inc);
}

// Round a fractional point to candidates by descending LP mass, skipping
// sites whose remaining capacity the workload would overflow, and price the
// pinned result. Capacity awareness keeps argmax collisions from wasting the
// probe on an unpriceable assignment.
void rounding_probe(const MilpInstance& inst, const LpProblem& base, const std::vector<double>& x,
                    Incumbent& inc) {
  const int m = static_cast<int>(inst.workloads.size());
  CapacityLedger ledger(inst);
  std::vector<int> site_for(m, -1);
  for (int k : ffd_order(inst)) {
    std::vector<std::pair<double, int>> ranked;  // (-mass, site)
    for (int i : inst.candidates[k]) ranked.push_back({-x[inst.x_index(i, k)], i});
    std::sort(ranked.begin(), ranked.end());
    if (!assignment_required(inst, k)) {
      double total = 0.0;
      for (auto& [negmass, i] : ranked) total += -negmass;
      if (total < 0.5) continue;  // keep the shed workload shed
    }
    int pick = -1;
    for (auto& [negmass, i] : ranked)
      if (ledger.fits(inst, k, i)) {
        pick = i;
        break;
      }
    if (pick < 0 && !ranked.empty()) pick = ranked.front().second;  // overflow; let the LP say no
    if (pick < 0) return;
    site_for[k] = pick;
    ledger.book(inst, k, pick);
  }
  try_pinned(inst, base, site_for, inc);
}

// Largest subset sum of `items` that fits under `cap`, by meet-in-the-middle.
// Returns cap unchanged when the row is too wide to enumerate.
double max_subset_sum_leq(const std::vector<double>& items, double cap) {
  const int n = static_cast<int>(items.size());
  if (n > 30) return cap;
  const int nl = n / 2;
  std::vector<double> left{0.0}, right{0.0};
  left.reserve(size_t{1} << nl);
  right.reserve(size_t{1} << (n - nl));
  for (int i = 0; i < nl; ++i)
    for (size_t sz = left.size(), s = 0; s < sz; ++s)
      if (double v = left[s] + items[i]; v <= cap + 1e-9) left.push_back(v);
  for (int i = nl; i < n; ++i)
    for (size_t sz = right.size(), s = 0; s < sz; ++s)
      if (double v = right[s] + items[i]; v <= cap + 1e-9) right.push_back(v);
  std::sort(right.begin(), right.end());
  double best = 0.0;
  for (double a : left) {
    auto it = std::upper_bound(right.begin(), right.end(), cap + 1e-9 - a);
    if (it != right.begin()) best = std::max(best, a + *(it - 1));
  }
  return std::min(best, cap);
}

// Presolve: a <=-row over binary columns with positive coefficients can only
// ever carry a subset sum of those coefficients, so its rhs tightens to the
// largest sum that fits. Fractional vertices park exactly on saturated
// capacity rows; pulling the rhs down to the best reachable load lifts the
// root bound off that plateau instead of leaving it to enumeration.
int tighten_knapsack_rows(LpProblem& base, int nb) {
  auto rows = std::make_shared<std::vector<LpRow>>(*base.rows);
  int tightened = 0;
  for (LpRow& row : *rows) {
    if (row.sense != RowSense::LessEq || row.rhs <= 0.0) continue;
    bool eligible = !row.terms.empty();
    std::vector<double> items;
    items.reserve(row.terms.size());
    for (const auto& [col, coef] : row.terms) {
      if (col >= nb || coef <= 0.0) {
        eligible = false;
        break;
      }
      items.push_back(coef);
    }
    if (!eligible) continue;
    double best = max_subset_sum_leq(items, row.rhs);
    if (best < row.rhs - 1e-7) {
      row.rhs = best + 1e-9;
      ++tightened;
    }
  }
  if (tightened) base.rows = std::move(rows);
  return tightened;
}

// Extended cover cuts for <=-rows over binary columns. A minimal cover C
// (sum of coefficients just above the rhs) admits at most |C|-1 members, and
// every binary at least as heavy as the heaviest cover member joins at the
// same rhs. Capacity plateaus of near-tied fractional vertices sit exactly on
// these rows, so root separation lifts the bound past the band B&B would
// otherwise enumerate.
std::vector<LpRow> separate_covers(const MilpInstance& inst, const std::vector<LpRow>& rows,
                                   const std::vector<double>& x, int max_cuts) {
  const int nb = inst.num_binaries();
  std::vector<LpRow> cuts;
  for (const LpRow& row : rows) {
    if (static_cast<int>(cuts.size()) >= max_cuts) break;
    if (row.sense != RowSense::LessEq || row.rhs <= 0.0) continue;
    bool binaries_only = !row.terms.empty();
    for (const auto& [col, coef] : row.terms)
      if (col >= nb || coef <= 0.0) {
        binaries_only = false;
        break;
      }
    if (!binaries_only) continue;

    std::vector<std::tuple<double, int, double>> items;  // (-x, col, coef)
    for (const auto& [col, coef] : row.terms)
      if (x[col] > 1e-6) items.push_back({-x[col], col, coef});
    std::sort(items.begin(), items.end());

    double sum = 0.0;
    size_t take = 0;
    while (take < items.size() && sum <= row.rhs + 1e-9) sum += std::get<2>(items[take++]);
    if (sum <= row.rhs + 1e-9) continue;  // no cover among fractional support
    std::vector<std::pair<int, double>> cover(items.size() ? take : 0);
    for (size_t t = 0; t < take; ++t)
      cover[t] = {std::get<1>(items[t]), std::get<2>(items[t])};
    // Minimalize from the low-mass end; afterwards no single member is droppable.
    for (size_t t = cover.size(); t-- > 0;)
      if (sum - cover[t].second > row.rhs + 1e-9) {
        sum -= cover[t].second;
        cover.erase(cover.begin() + static_cast<long>(t));
      }

    double lhs = 0.0, amax = 0.0;
    for (auto& [col, coef] : cover) {
      lhs += x[col];
      amax = std::max(amax, coef);
    }
    double rhs = static_cast<double>(cover.size()) - 1.0;
    if (lhs <= rhs + 1e-6) continue;  // not violated at this point

    LpRow cut;
    cut.sense = RowSense::LessEq;
    cut.rhs = rhs;
    for (auto& [col, coef] : cover) cut.terms.push_back({col, 1.0});
    for (const auto& [col, coef] : row.terms) {  // extension by weight
      if (coef < amax - 1e-12) continue;
      bool in_cover = false;
      for (auto& [ccol, ccoef] : cover)
        if (ccol == col) {
          in_cover = true;
          break;
        }
      if (!in_cover) cut.terms.push_back({col, 1.0});
    }
    cuts.push_back(std::move(cut));
  }
  return cuts;
}

// LP-guided dive: repeatedly pin the most-decided fractional workload to its
// highest-mass site and re-price. Re-solving after every pin follows the
// relaxation's alternate-optimum face, which lands integral points the static
// rounding probes miss; on a zero-gap plateau the dive typically returns an
// incumbent matching the root bound and closes the search outright.
void fractional_dive(const MilpInstance& inst, const LpProblem& base,
                     const std::vector<double>& start_x, Incumbent& inc) {
  const int m = static_cast<int>(inst.workloads.size());
  LpProblem lp = base;
  std::vector<double> x = start_x;
  std::vector<char> pinned(m, 0);
  for (int round = 0; round < m; ++round) {
    int kstar = -1;
    double best_lead = 0.0;
    for (int k = 0; k < m; ++k) {
      if (pinned[k]) continue;
      double lead = 0.0, mass = 0.0;
      for (int i : inst.candidates[k]) {
        double v = x[inst.x_index(i, k)];
        lead = std::max(lead, v);
        mass += v;
      }
      if (mass - lead <= kIntegralityTol && (lead <= kIntegralityTol || lead >= 1.0 - kIntegralityTol))
        continue;  // already integral; the LP may still move it
      if (kstar < 0 || lead > best_lead) {
        kstar = k;
        best_lead = lead;
      }
    }
    if (kstar < 0) return;  // nothing fractional left; the integral branch offers

    std::vector<std::pair<double, int>> ranked;  // (-mass, site)
    for (int i : inst.candidates[kstar]) ranked.push_back({-x[inst.x_index(i, kstar)], i});
    std::sort(ranked.begin(), ranked.end());

    bool advanced = false;
    for (auto& [negmass, site] : ranked) {
      for (int i : inst.candidates[kstar]) {
        int b = inst.x_index(i, kstar);
        lp.lower[b] = 0.0;
        lp.upper[b] = i == site ? 1.0 : 0.0;
      }
      if (assignment_required(inst, kstar)) {
        int b = inst.x_index(site, kstar);
        lp.lower[b] = 1.0;
      }
      LpResult res = solve_lp(lp);
      if (res.status != LpStatus::Optimal) continue;
      if (inc.found && res.objective >= inc.objective - kPruneSlack) continue;
      x = res.x;
      pinned[kstar] = 1;
      advanced = true;
      if (integral(inst, x)) {
        offer(inc, res.objective, x);
        return;
      }
      break;
    }
    if (!advanced) return;  // every candidate pin prices worse or infeasible
  }
}

SolveOutcome infeasible_outcome(const MilpInstance& inst, long nodes, double wall) {
  SolveOutcome out;
  out.status = SolveStatus::Infeasible;
  out.objective = kInfty;
  out.bound = kInfty;
  out.gap = 0.0;
  out.nodes = nodes;
  out.wall_seconds = wall;
  out.root_groups = inst.group_labels();
  return out;
}

}  // namespace

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Timeout: return "Timeout";
  }
  return "?";
}

Placement placement_from_solution(const MilpInstance& inst, const std::vector<double>& x,
                                  double objective) {
  if (static_cast<int>(x.size()) != inst.num_vars())
    throw std::invalid_argument("solution vector does not match the instance");
  const Network& net = inst.net;
  const int m = static_cast<int>(inst.workloads.size());

  Placement pl;
  pl.objective = objective;
  std::vector<int> site_for(m, -1);
  for (int b = 0; b < inst.num_binaries(); ++b) {
    if (x[b] > 0.5) {
      site_for[inst.binaries[b].workload] = inst.binaries[b].site;
      pl.assignment[inst.workloads[inst.binaries[b].workload].id] =
          net.site_id(inst.binaries[b].site);
    }
  }

  std::vector<int> incumbent_site(m, -1);
  if (inst.config.incumbent) {
    for (int k = 0; k < m; ++k) {
      auto it = inst.config.incumbent->assignment.find(inst.workloads[k].id);
      if (it != inst.config.incumbent->assignment.end())
        incumbent_site[k] = net.site_index(it->second);
    }
  }
  for (int k = 0; k < m; ++k) {
    if (site_for[k] < 0) continue;
    const Workload& w = inst.workloads[k];
    const Site& s = *inst.snapshot.find_site(net.site_id(site_for[k]));
    pl.carbon_rate_g_per_h += blended_carbon_intensity(s) * w.power_kw;
    pl.water_rate_l_per_h += s.water_intensity_l_per_kwh * w.power_kw;
    if (incumbent_site[k] >= 0 && incumbent_site[k] != site_for[k])
      pl.migration_g += transition_carbon_g(net, inst.snapshot, w, incumbent_site[k], site_for[k]);
  }

  const int nb = inst.num_binaries();
  for (int j = 0; j < static_cast<int>(inst.path_vars.size()); ++j) {
    double wgt = x[nb + j];
    if (wgt <= kPathEps) continue;
    const MilpPathVar& pv = inst.path_vars[j];
    if (pv.source != site_for[pv.workload]) continue;  // zero by flow balance; noise
    WeightedPath wp;
    wp.weight_gbps = wgt;
    wp.nodes.reserve(pv.path.nodes.size());
    for (int node : pv.path.nodes) wp.nodes.push_back(net.site_id(node));
    const WorkloadId& wid = inst.workloads[pv.workload].id;
    for (size_t h = 0; h + 1 < wp.nodes.size(); ++h)
      pl.flows[wid][{wp.nodes[h], wp.nodes[h + 1]}] += wgt;
    pl.paths[wid].push_back(std::move(wp));
  }
  return pl;
}

SolveOutcome solve(const MilpInstance& inst, const SolveParams& params) {
  auto start = Clock::now();
  const bool trace = std::getenv("SOVOR_TRACE") != nullptr;
  const double budget_seconds = params.budget_seconds;
  if (inst.trivially_infeasible) return infeasible_outcome(inst, 0, elapsed_seconds(start));

  LpProblem base = inst.to_lp();
  const int nb = inst.num_binaries();

  {
    int tightened = tighten_knapsack_rows(base, nb);
    if (trace) std::fprintf(stderr, "rhs tightening: %d rows\n", tightened);
  }

  // Root cutting rounds: separate extended covers against the relaxation
  // until none are violated. The cuts come from original row data, so every
  // node of the tree prices over the strengthened LP.
  {
    const std::vector<LpRow> original = *base.rows;
    int total_cuts = 0;
    for (int round = 0; round < 8 && total_cuts < 200; ++round) {
      LpResult res = solve_lp(base);
      if (res.status != LpStatus::Optimal) break;  // the tree loop reports it
      std::vector<LpRow> cuts = separate_covers(inst, original, res.x, 200 - total_cuts);
      if (cuts.empty()) break;
      auto rows = std::make_shared<std::vector<LpRow>>(*base.rows);
      for (LpRow& cut : cuts) rows->push_back(std::move(cut));
      total_cuts += static_cast<int>(cuts.size());
      base.rows = std::move(rows);
    }
    if (trace) std::fprintf(stderr, "cover cuts: %d\n", total_cuts);
  }

  Incumbent inc;
  greedy_incumbent(inst, base, inc);
  if (trace)
    std::fprintf(stderr, "greedy: found=%d obj=%.6f\n", inc.found ? 1 : 0,
                 inc.found ? inc.objective : 0.0);

  std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
  long next_id = 0;
  open.push({next_id++, 0, -kInfty, std::vector<signed char>(nb, -1)});

  // Root reduced costs support global variable fixing: a nonbasic binary whose
  // reduced cost alone closes the incumbent gap can never flip in an improving
  // solution.
  // Pruning slack: within rel_gap of the incumbent counts as matched.
  auto prune_allow = [&](double inc_obj) {
    return std::max(kPruneSlack, params.rel_gap * std::fabs(inc_obj));
  };

  std::vector<signed char> root_fix(nb, -1);
  std::vector<double> root_dj;
  std::vector<double> root_x;
  double root_obj = -kInfty;
  double fixed_at_obj = kInfty;
  auto refit_root_fixes = [&]() {
    if (root_dj.empty() || !inc.found || inc.objective >= fixed_at_obj) return;
    fixed_at_obj = inc.objective;
    double gap = inc.objective - prune_allow(inc.objective) - root_obj;
    for (int b = 0; b < nb; ++b) {
      if (root_fix[b] >= 0) continue;
      if (root_x[b] < 0.5 && root_dj[b] > gap) root_fix[b] = 0;
      else if (root_x[b] > 0.5 && -root_dj[b] > gap) root_fix[b] = 1;
    }
  };

  long nodes = 0;
  long fractional_nodes = 0;
  bool timed_out = false;
  bool proved = false;

  while (!open.empty()) {
    if (budget_seconds > 0.0 && elapsed_seconds(start) > budget_seconds) {
      timed_out = true;
      break;
    }
    Node node = open.top();
    // Best-first: once the cheapest open bound cannot beat the incumbent by
    // more than the allowed gap, nothing left can.
    if (inc.found && node.priority >= inc.objective - prune_allow(inc.objective)) {
      proved = true;
      break;
    }
    open.pop();

    LpProblem lp = base;
    apply_fixes(inst, node.fix, root_fix, lp);
    ++nodes;
    LpResult res = solve_lp(lp);
    if (res.status == LpStatus::Infeasible) continue;
    if (res.status != LpStatus::Optimal)
      throw std::runtime_error(std::string("relaxation pricing failed: ") + to_string(res.status) +
                               (res.note.empty() ? "" : " (" + res.note + ")"));
    if (node.depth == 0) {
      root_obj = res.objective;
      root_dj.assign(res.dj.begin(), res.dj.begin() + nb);
      root_x.assign(res.x.begin(), res.x.begin() + nb);
      refit_root_fixes();  // the greedy incumbent may already close gaps
    }
    if (inc.found && res.objective >= inc.objective - prune_allow(inc.objective)) continue;
    if (integral(inst, res.x)) {
      offer(inc, res.objective, res.x);
      refit_root_fixes();
      continue;
    }

    ++fractional_nodes;
    if (!inc.found || fractional_nodes == 1 || fractional_nodes % 20 == 0) {
      double before = inc.found ? inc.objective : kInfty;
      rounding_probe(inst, base, res.x, inc);
      if (!inc.found || fractional_nodes == 1 || fractional_nodes % 200 == 0)
        fractional_dive(inst, base, res.x, inc);
      refit_root_fixes();
      if (trace)
        std::fprintf(stderr, "node %ld depth %d lp=%.6f probes: %.6f -> %.6f\n", nodes, node.depth,
                     res.objective, before, inc.found ? inc.objective : kInfty);
    }
    if (inc.found && res.objective >= inc.objective - prune_allow(inc.objective)) continue;

    SosBranch sb = sos_branch(inst, node.fix, root_fix, res.x);
    if (sb.workload >= 0) {
      Node keep_lead{next_id++, node.depth + 1, res.objective, node.fix};
      for (int fb : sb.forbid_a) keep_lead.fix[fb] = 0;
      Node keep_tail{next_id++, node.depth + 1, res.objective, node.fix};
      for (int fb : sb.forbid_b) keep_tail.fix[fb] = 0;
      open.push(std::move(keep_lead));
      open.push(std::move(keep_tail));
      continue;
    }
    int b = branch_variable(inst, res.x);
    if (b < 0) {  // all binaries within tolerance after all
      offer(inc, res.objective, res.x);
      refit_root_fixes();
      continue;
    }
    Node down{next_id++, node.depth + 1, res.objective, node.fix};
    down.fix[b] = 0;
    Node up{next_id++, node.depth + 1, res.objective, node.fix};
    up.fix[b] = 1;
    open.push(std::move(down));
    open.push(std::move(up));
  }

  SolveOutcome out;
  out.nodes = nodes;
  out.wall_seconds = elapsed_seconds(start);
  if (!timed_out || proved) {
    if (!inc.found) return infeasible_outcome(inst, nodes, out.wall_seconds);
    out.status = SolveStatus::Optimal;
    out.objective = inc.objective;
    const double allow = prune_allow(inc.objective);
    if (allow <= kPruneSlack) {
      out.bound = inc.objective;
      out.gap = 0.0;
    } else {
      // Every prune (node bound, early break, reduced-cost fix) only discards
      // solutions within `allow` of the final incumbent: objectives here are
      // nonnegative and incumbents improve monotonically, so the thresholds
      // used along the way never drop below incumbent - allow.
      out.bound = inc.objective - allow;
      out.gap = (out.objective - out.bound) / std::max(1.0, std::fabs(out.objective));
    }
    out.placement = placement_from_solution(inst, inc.x, inc.objective);
    return out;
  }
  out.status = SolveStatus::Timeout;
  double floor = open.empty() ? inc.objective : open.top().priority;
  if (inc.found) {
    out.objective = inc.objective;
    out.bound = std::min(floor, inc.objective);
    out.gap = (out.objective - out.bound) / std::max(1.0, std::fabs(out.objective));
    out.placement = placement_from_solution(inst, inc.x, inc.objective);
  } else {
    out.objective = kInfty;
    out.bound = floor;
    out.gap = kInfty;
  }
  return out;
}

SolveOutcome solve(const MilpInstance& inst, double budget_seconds) {
  return solve(inst, SolveParams{budget_seconds, 0.0});
}

SolveOutcome brute_force(const MilpInstance& inst) {
  auto start = Clock::now();
  if (inst.trivially_infeasible) return infeasible_outcome(inst, 0, elapsed_seconds(start));

  const int m = static_cast<int>(inst.workloads.size());
  const int n = inst.net.num_sites();

  // Options per workload: every gated candidate, plus "unplaced" when the
  // assignment row was relaxed away.
  std::vector<std::vector<int>> options(m);
  double combos = 1.0;
  for (int k = 0; k < m; ++k) {
    if (!assignment_required(inst, k)) options[k].push_back(-1);
    for (int i : inst.candidates[k]) options[k].push_back(i);
    if (options[k].empty()) return infeasible_outcome(inst, 0, elapsed_seconds(start));
    combos *= static_cast<double>(options[k].size());
    if (combos > 1e6)
      throw std::invalid_argument("assignment space too large for exhaustive pricing");
  }

  std::vector<double> power_cap(n, 0.0), water_cap(n, 0.0), omega(n, 0.0);
  std::vector<char> check_power(n, 0), check_water(n, 0);
  for (int i = 0; i < n; ++i) {
    const Site& s = *inst.snapshot.find_site(inst.net.site_id(i));
    power_cap[i] = s.power_cap_kw;
    water_cap[i] = s.water_permit_l_per_h;
    omega[i] = s.water_intensity_l_per_kwh;
    check_power[i] = inst.relaxed.power_sites.count(s.id) == 0;
    check_water[i] = inst.relaxed.water_sites.count(s.id) == 0;
  }
  // The pre-check may only reject what the LP would also reject, so it uses a
  // strictly looser tolerance than the LP row feasibility test.
  auto caps_ok = [&](const std::vector<int>& site_for) {
    std::vector<double> load(n, 0.0);
    for (int k = 0; k < m; ++k)
      if (site_for[k] >= 0) load[site_for[k]] += inst.workloads[k].power_kw;
    for (int i = 0; i < n; ++i) {
      if (check_power[i] && load[i] > power_cap[i] + 1e-6 * std::max(1.0, power_cap[i]))
        return false;
      if (check_water[i] &&
          omega[i] * load[i] > water_cap[i] + 1e-6 * std::max(1.0, water_cap[i]))
        return false;
    }
    return true;
  };

  const LpProblem base = inst.to_lp();
  Incumbent inc;
  long nodes = 0;

  std::vector<int> pick(m, 0);
  std::vector<int> site_for(m, -1);
  while (true) {
    for (int k = 0; k < m; ++k) site_for[k] = options[k][pick[k]];
    if (caps_ok(site_for)) {
      ++nodes;
      LpProblem lp = base;
      for (int b = 0; b < inst.num_binaries(); ++b) {
        double v = site_for[inst.binaries[b].workload] == inst.binaries[b].site ? 1.0 : 0.0;
        lp.lower[b] = lp.upper[b] = v;
      }
      LpResult res = solve_lp(lp);
      if (res.status == LpStatus::Optimal) offer(inc, res.objective, res.x);
    }
    int k = m - 1;
    while (k >= 0 && pick[k] + 1 == static_cast<int>(options[k].size())) pick[k--] = 0;
    if (k < 0) break;
    ++pick[k];
  }

  if (!inc.found) return infeasible_outcome(inst, nodes, elapsed_seconds(start));
  SolveOutcome out;
  out.status = SolveStatus::Optimal;
  out.objective = inc.objective;
  out.bound = inc.objective;
  out.gap = 0.0;
  out.nodes = nodes;
  out.wall_seconds = elapsed_seconds(start);
  out.placement = placement_from_solution(inst, inc.x, inc.objective);
  return out;
}

}  // namespace sovor
