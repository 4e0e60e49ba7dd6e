// Command-line front end for the orchestration engine.
//
// Exit codes: 0 on success (a feasible result where one was asked for),
// 2 when the instance is infeasible and a certificate was produced,
// 1 on any error.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "sovor/bnb.hpp"
#include "sovor/config.hpp"
#include "sovor/formulation.hpp"
#include "sovor/fsor.hpp"
#include "sovor/json_io.hpp"
#include "sovor/scenarios.hpp"
#include "sovor/telemetry.hpp"
#include "sovor/twin.hpp"
#include "sovor/verify.hpp"

namespace {

using namespace sovor;

struct SystemInput {
  TelemetrySnapshot snap;
  std::vector<Workload> workloads;
};

// One file holding {"snapshot": ..., "workloads": [...]}.
SystemInput load_system(const std::string& path) {
  nlohmann::json j = load_json(path);
  SystemInput sys;
  sys.snap = snapshot_from_json(j.at("snapshot"));
  for (const auto& wj : j.at("workloads")) sys.workloads.push_back(workload_from_json(wj));
  auto violations = validate_system(sys.snap, sys.workloads);
  if (!violations.empty()) throw std::runtime_error(path + ": invalid system: " + violations.front());
  return sys;
}

void write_or_print(const std::string& out, const nlohmann::json& j) {
  if (out.empty())
    std::cout << j.dump(2) << "\n";
  else
    save_json(out, j);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) parts.push_back(item);
  return parts;
}

struct SolveOpts {
  std::string system, incumbent, out;
  double alpha = 0.5, budget_secs = 60.0, rel_gap = 0.0;
  int hop_limit = 3;
  bool transport_energy = false;
};

int run_solve(const SolveOpts& o) {
  SystemInput sys = load_system(o.system);
  BuildConfig cfg;
  cfg.alpha = o.alpha;
  cfg.hop_limit = o.hop_limit;
  cfg.include_transport_energy = o.transport_energy;
  if (!o.incumbent.empty()) cfg.incumbent = placement_from_json(load_json(o.incumbent));

  MilpInstance inst = build_instance(sys.snap, sys.workloads, cfg);
  SolveOutcome outcome = solve(inst, SolveParams{o.budget_secs, o.rel_gap});
  if (outcome.status == SolveStatus::Infeasible) {
    InfeasibilityCertificate cert = extract_iis(inst, o.budget_secs);
    std::cout << cert.diagnosis;
    write_or_print(o.out, to_json(cert));
    return 2;
  }
  if (!outcome.placement) {
    std::cerr << "solve timed out before finding any feasible placement\n";
    return 1;
  }
  VerifyReport check = verify_placement(sys.snap, sys.workloads, *outcome.placement, cfg);
  if (!check.ok()) {
    std::cerr << "solver output failed verification: " << check.violations.front() << "\n";
    return 1;
  }
  std::cout << "status=" << to_string(outcome.status) << " objective=" << outcome.objective
            << " bound=" << outcome.bound << " gap=" << outcome.gap
            << " nodes=" << outcome.nodes << " seconds=" << outcome.wall_seconds
            << " binaries=" << inst.num_binaries() << " paths=" << inst.path_vars.size() << "\n";
  write_or_print(o.out, to_json(*outcome.placement));
  return 0;
}

struct FsorOpts {
  std::string system, set, out;
  bool enumerate = false;
  int limit = 15;
  double alpha = 0.5;
  int hop_limit = 3;
};

int run_fsor(const FsorOpts& o) {
  SystemInput sys = load_system(o.system);
  BuildConfig cfg;
  cfg.alpha = o.alpha;
  cfg.hop_limit = o.hop_limit;
  if (o.enumerate) {
    FsorReport report =
        enumerate_fsor(sys.snap, sys.workloads, cfg, static_cast<std::size_t>(o.limit));
    write_or_print(o.out, to_json(report));
    return 0;
  }
  std::vector<Workload> subset;
  for (const std::string& id : split_csv(o.set)) {
    bool found = false;
    for (const Workload& w : sys.workloads)
      if (w.id == id) {
        subset.push_back(w);
        found = true;
        break;
      }
    if (!found) throw std::runtime_error("unknown workload id: " + id);
  }
  Membership m = fsor_contains(sys.snap, subset, cfg);
  nlohmann::json j{{"member", m.member}};
  if (m.witness) j["witness"] = to_json(*m.witness);
  std::cout << (m.member ? "member\n" : "not a member\n");
  write_or_print(o.out, j);
  return 0;
}

struct IisOpts {
  std::string system, out;
  double budget_secs = 0.0;
  double alpha = 0.5;
  int hop_limit = 3;
};

int run_iis(const IisOpts& o) {
  SystemInput sys = load_system(o.system);
  BuildConfig cfg;
  cfg.alpha = o.alpha;
  cfg.hop_limit = o.hop_limit;
  MilpInstance inst = build_instance(sys.snap, sys.workloads, cfg);
  SolveOutcome outcome = solve(inst, o.budget_secs);
  if (outcome.status != SolveStatus::Infeasible) {
    std::cout << "instance is feasible; nothing to certify\n";
    return 0;
  }
  InfeasibilityCertificate cert = extract_iis(inst, o.budget_secs);
  std::cout << cert.diagnosis;
  write_or_print(o.out, to_json(cert));
  return 2;
}

struct LoopOpts {
  std::string system, replay, config, out;
  int cycles = 0;  // 0: run for every cycle the replay covers
  std::int64_t start_ts = 0;
};

int run_loop(const LoopOpts& o) {
  SystemInput sys = load_system(o.system);
  EngineConfig ec;
  if (!o.config.empty()) ec = load_engine_config(o.config);
  LoopConfig lc = ec.loop_config();

  std::vector<RawReading> readings = load_readings(o.replay);
  if (readings.empty()) throw std::runtime_error("replay stream is empty");
  int cycles = o.cycles;
  if (cycles <= 0)
    cycles = static_cast<int>((readings.back().timestamp_s - static_cast<double>(o.start_ts)) /
                              lc.cycle_s) +
             1;

  ControlLoop loop(sys.snap, sys.workloads, lc);
  std::ofstream trace;
  if (!o.out.empty()) {
    trace.open(o.out);
    if (!trace) throw std::runtime_error("cannot open trace file: " + o.out);
  }
  std::map<CycleOutcome, int> outcomes;
  for (int i = 0; i < cycles; ++i) {
    std::int64_t ts = o.start_ts + static_cast<std::int64_t>(i * lc.cycle_s);
    CycleRecord rec = loop.run_cycle(readings, ts);
    ++outcomes[rec.outcome];
    if (trace.is_open()) trace << to_json(rec).dump() << "\n";
  }
  std::cout << "cycles=" << cycles;
  for (const auto& [outcome, count] : outcomes)
    std::cout << " " << to_string(outcome) << "=" << count;
  const PlantState& plant = loop.plant();
  std::cout << " carbon_g=" << plant.cumulative_carbon_g
            << " water_l=" << plant.cumulative_water_l << "\n";
  return 0;
}

struct ScenarioOpts {
  std::string id = "A", seeds = "1,2,3,4,5", out_dir = ".";
  double horizon_hours = 168.0, cycle_minutes = 5.0, alpha = 0.5, budget_secs = 60.0;
  bool traces = false;
};

int run_scenario_cmd(const ScenarioOpts& o) {
  ScenarioSpec spec = default_spec(scenario_from_string(o.id));
  spec.horizon_s = o.horizon_hours * 3600.0;
  spec.cycle_s = o.cycle_minutes * 60.0;
  spec.alpha = o.alpha;
  spec.solver_budget_s = o.budget_secs;
  std::vector<std::uint64_t> seeds;
  for (const std::string& s : split_csv(o.seeds)) seeds.push_back(std::stoull(s));

  ComparativeReport report = run_scenario(spec, seeds);
  std::string prefix = o.out_dir + "/scenario_" + o.id;
  save_json(prefix + "_spec.json", to_json(spec));
  save_json(prefix + "_report.json", to_json(report, o.traces));
  std::ofstream csv(prefix + "_report.csv");
  if (!csv) throw std::runtime_error("cannot write " + prefix + "_report.csv");
  csv << report_csv(report);
  std::cout << report_csv(report);
  return 0;
}

struct BenchOpts {
  std::string scales = "4x10,6x15,8x20", out;
  int instances = 5;
  double budget_secs = 300.0, rel_gap = 1e-4;
  std::uint64_t seed = 1;
};

int run_bench_cmd(const BenchOpts& o) {
  std::vector<std::pair<int, int>> scales;
  for (const std::string& s : split_csv(o.scales)) {
    auto x = s.find('x');
    if (x == std::string::npos) throw std::runtime_error("scale must look like 4x10: " + s);
    scales.emplace_back(std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1)));
  }
  std::vector<BenchRow> rows = run_bench(scales, o.instances, o.budget_secs, o.seed, o.rel_gap);
  std::string csv = bench_csv(rows);
  std::cout << csv;
  if (!o.out.empty()) {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << csv;
  }
  return 0;
}

struct ExportOpts {
  std::string system, out;
  double alpha = 0.5;
  int hop_limit = 3;
};

int run_export_lp(const ExportOpts& o) {
  SystemInput sys = load_system(o.system);
  BuildConfig cfg;
  cfg.alpha = o.alpha;
  cfg.hop_limit = o.hop_limit;
  MilpInstance inst = build_instance(sys.snap, sys.workloads, cfg);
  std::string text = write_lp(inst);
  if (o.out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write " + o.out);
    f << text;
  }
  return 0;
}

struct ReportOpts {
  std::string trace, out;
};

int run_report(const ReportOpts& o) {
  std::ifstream in(o.trace);
  if (!in) throw std::runtime_error("cannot open trace file: " + o.trace);
  nlohmann::json summary;
  std::map<std::string, int> outcomes;
  int cycles = 0, certificates = 0, alerts = 0;
  double solve_seconds = 0.0;
  long solver_nodes = 0;
  nlohmann::json last;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    ++cycles;
    ++outcomes[rec.at("outcome").get<std::string>()];
    certificates += rec.contains("certificate");
    alerts += static_cast<int>(rec.at("alerts").size());
    solve_seconds += rec.at("solve_seconds").get<double>();
    solver_nodes += rec.at("solver_nodes").get<long>();
    last = std::move(rec);
  }
  if (cycles == 0) throw std::runtime_error("trace is empty: " + o.trace);
  summary["cycles"] = cycles;
  summary["outcomes"] = outcomes;
  summary["certificates"] = certificates;
  summary["alerts"] = alerts;
  summary["solve_seconds"] = solve_seconds;
  summary["solver_nodes"] = solver_nodes;
  summary["final_cumulative_carbon_g"] = last.at("cumulative_carbon_g");
  summary["final_cumulative_water_l"] = last.at("cumulative_water_l");
  write_or_print(o.out, summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sustainability-constrained workload orchestration"};
  app.require_subcommand(1);

  SolveOpts so;
  CLI::App* solve = app.add_subcommand("solve", "solve one placement instance");
  solve->add_option("--system", so.system, "system JSON ({snapshot, workloads})")->required();
  solve->add_option("--incumbent", so.incumbent, "current placement JSON, enables migration");
  solve->add_option("--alpha", so.alpha, "carbon weight in [0,1]");
  solve->add_option("--budget-secs", so.budget_secs, "solver wall budget, 0 = unlimited");
  solve->add_option("--rel-gap", so.rel_gap, "accept incumbents within this relative gap");
  solve->add_option("--hop-limit", so.hop_limit, "max hops per routed path");
  solve->add_flag("--transport-energy", so.transport_energy, "price per-flow network carbon");
  solve->add_option("--out", so.out, "write placement (or certificate) JSON here");

  FsorOpts fo;
  CLI::App* fsor = app.add_subcommand("fsor", "feasibility-region analytics");
  fsor->add_option("--system", fo.system, "system JSON")->required();
  fsor->add_option("--set", fo.set, "comma-separated workload ids to test for membership");
  fsor->add_flag("--enumerate", fo.enumerate, "enumerate the whole feasible family");
  fsor->add_option("--limit", fo.limit, "max universe size for enumeration");
  fsor->add_option("--alpha", fo.alpha, "carbon weight in [0,1]");
  fsor->add_option("--hop-limit", fo.hop_limit, "max hops per routed path");
  fsor->add_option("--out", fo.out, "write the report JSON here");

  IisOpts io;
  CLI::App* iis = app.add_subcommand("iis", "extract a minimal infeasibility certificate");
  iis->add_option("--system", io.system, "system JSON")->required();
  iis->add_option("--budget-secs", io.budget_secs, "per-solve budget, 0 = unlimited");
  iis->add_option("--alpha", io.alpha, "carbon weight in [0,1]");
  iis->add_option("--hop-limit", io.hop_limit, "max hops per routed path");
  iis->add_option("--out", io.out, "write the certificate JSON here");

  LoopOpts lo;
  CLI::App* loop = app.add_subcommand("loop", "run the control loop over a replay stream");
  loop->add_option("--system", lo.system, "system JSON")->required();
  loop->add_option("--replay", lo.replay, "raw readings, newline-delimited JSON")->required();
  loop->add_option("--config", lo.config, "engine config JSON");
  loop->add_option("--cycles", lo.cycles, "cycle count (default: cover the replay)");
  loop->add_option("--start-ts", lo.start_ts, "first cycle timestamp, seconds");
  loop->add_option("--out", lo.out, "write the cycle trace as newline-delimited JSON");

  ScenarioOpts sco;
  CLI::App* scenario = app.add_subcommand("scenario", "run a reference scenario comparison");
  scenario->add_option("id", sco.id, "A, B or C")->required();
  scenario->add_option("--seeds", sco.seeds, "comma-separated seeds");
  scenario->add_option("--horizon-hours", sco.horizon_hours, "simulated horizon");
  scenario->add_option("--cycle-minutes", sco.cycle_minutes, "control cycle length");
  scenario->add_option("--alpha", sco.alpha, "carbon weight in [0,1]");
  scenario->add_option("--budget-secs", sco.budget_secs, "per-solve budget");
  scenario->add_option("--out-dir", sco.out_dir, "directory for spec, CSV and JSON reports");
  scenario->add_flag("--traces", sco.traces, "embed full cycle traces in the JSON report");

  BenchOpts bo;
  CLI::App* bench = app.add_subcommand("bench", "solver benchmark on random instances");
  bench->add_option("--scales", bo.scales, "comma-separated NxM scales");
  bench->add_option("--instances", bo.instances, "instances per scale");
  bench->add_option("--budget-secs", bo.budget_secs, "per-solve budget");
  bench->add_option("--rel-gap", bo.rel_gap, "accept incumbents within this relative gap");
  bench->add_option("--seed", bo.seed, "base seed");
  bench->add_option("--out", bo.out, "write the CSV here");

  ExportOpts eo;
  CLI::App* exportlp = app.add_subcommand("export-lp", "write the instance in LP text format");
  exportlp->add_option("--system", eo.system, "system JSON")->required();
  exportlp->add_option("--alpha", eo.alpha, "carbon weight in [0,1]");
  exportlp->add_option("--hop-limit", eo.hop_limit, "max hops per routed path");
  exportlp->add_option("--out", eo.out, "output path (default: stdout)");

  ReportOpts ro;
  CLI::App* report = app.add_subcommand("report", "summarize a control-loop trace");
  report->add_option("--trace", ro.trace, "cycle trace, newline-delimited JSON")->required();
  report->add_option("--out", ro.out, "write the summary JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(so);
    if (fsor->parsed()) return run_fsor(fo);
    if (iis->parsed()) return run_iis(io);
    if (loop->parsed()) return run_loop(lo);
    if (scenario->parsed()) return run_scenario_cmd(sco);
    if (bench->parsed()) return run_bench_cmd(bo);
    if (exportlp->parsed()) return run_export_lp(eo);
    if (report->parsed()) return run_report(ro);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
