// Command-line driver: single runs with optional cycle traces, and latency
// sweeps comparing the baseline and prefetching hierarchies.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>

#include "pcsim/experiment.hpp"

namespace {

using namespace pcsim;

void add_workload_options(CLI::App& app, WorkloadSpec& spec, unsigned& gap) {
  app.add_option("--nodes", spec.nodes, "list length for traversal/insertion");
  app.add_option("--gap", gap, "compute cycles between accesses (default per workload)");
  app.add_option("--seed", spec.seed, "generator seed");
  app.add_option("--buckets", spec.buckets, "hashtable buckets");
  app.add_option("--keys", spec.keys, "hashtable keys");
  app.add_option("--lookups", spec.lookups, "hashtable lookups");
  app.add_option("--inserts", spec.inserts, "insertion: nodes spliced into the list");
  app.add_option("--disks", spec.disks, "hanoi: list length");
  app.add_option("--elements", spec.elements, "array kernel length");
  app.add_option("--requests", spec.requests, "random stream length");
  app.add_option("--program", spec.program_path, "token program file (workload 'file')");
  app.add_option("--image", spec.image_path, "memory image file (workload 'file')");
}

std::vector<Topology> topologies(const std::string& name) {
  if (name == "both") return {Topology::Baseline, Topology::Alternate};
  return {parse_topology(name)};
}

int emit(const std::vector<ResultRow>& rows, const std::string& format) {
  std::cout << report(rows, parse_report_format(format));
  const bool ok = std::all_of(rows.begin(), rows.end(),
                              [](const ResultRow& r) { return r.status == "ok"; });
  if (!ok) {
    for (const auto& r : rows)
      if (r.status != "ok")
        std::cerr << r.workload << " " << r.topology << " L=" << r.latency << ": " << r.status
                  << ": " << r.message << "\n";
  }
  return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cycle-level simulator for a pointer-chasing prefetcher"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "simulate one workload");
  std::string run_topology = "both";
  unsigned run_latency = 5;
  unsigned run_gap = 0;
  WorkloadSpec run_spec;
  std::string run_format = "table";
  std::string trace_path;
  std::uint64_t run_max_cycles = kDefaultMaxCycles;
  bool disable_prefetch = false;
  run->add_option("--topology", run_topology, "baseline, alternate or both")
      ->check(CLI::IsMember({"baseline", "alternate", "both"}));
  run->add_option("--latency", run_latency, "memory latency in cycles")
      ->check(CLI::PositiveNumber);
  run->add_option("--workload", run_spec.name, "workload generator")
      ->check(CLI::IsMember(workload_names()));
  run->add_option("--nodes-per-line", run_spec.nodes_per_line, "1 or 2");
  add_workload_options(*run, run_spec, run_gap);
  run->add_option("--format", run_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  run->add_option("--trace", trace_path, "write a per-cycle trace to FILE");
  run->add_option("--max-cycles", run_max_cycles, "deadlock watchdog");
  run->add_flag("--no-prefetch", disable_prefetch, "suppress prefetch issue");

  // sweep
  auto* sw = app.add_subcommand("sweep", "latency sweep over workloads");
  std::vector<unsigned> latencies{2, 5, 10, 20, 40};
  std::vector<std::string> workloads{"traversal"};
  std::vector<unsigned> npls{1};
  unsigned sweep_gap = 0;
  WorkloadSpec sweep_spec;
  std::string sweep_format = "table";
  unsigned threads = 0;
  std::uint64_t sweep_max_cycles = kDefaultMaxCycles;
  sw->add_option("--latencies", latencies, "comma separated")->delimiter(',');
  sw->add_option("--workloads", workloads, "comma separated")
      ->delimiter(',')
      ->check(CLI::IsMember(workload_names()));
  sw->add_option("--nodes-per-line", npls, "comma separated, traversal only")
      ->delimiter(',');
  add_workload_options(*sw, sweep_spec, sweep_gap);
  sw->add_option("--format", sweep_format, "table, csv or json")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  sw->add_option("--threads", threads, "worker threads (0 = hardware)");
  sw->add_option("--max-cycles", sweep_max_cycles, "deadlock watchdog");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      if (run->count("--gap")) run_spec.gap = run_gap;
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw ConfigError("cannot open trace file '" + trace_path + "'");
      }
      std::vector<ResultRow> rows;
      for (Topology t : topologies(run_topology)) {
        ExperimentConfig cfg;
        cfg.topology = t;
        cfg.latency = run_latency;
        cfg.workload = run_spec;
        cfg.max_cycles = run_max_cycles;
        cfg.prefetcher.disable_prefetch = disable_prefetch;
        if (trace.is_open()) {
          trace << "# " << topology_name(t) << "\n";
          cfg.trace = &trace;
        }
        rows.push_back(make_row(cfg, run_experiment(cfg)));
      }
      fill_speedups(rows);
      return emit(rows, run_format);
    }

    if (sweep_max_cycles == 0) throw ConfigError("--max-cycles must be positive");
    if (sw->count("--gap")) sweep_spec.gap = sweep_gap;
    std::vector<ExperimentConfig> configs;
    for (const auto& name : workloads) {
      const std::vector<unsigned> lines =
          name == "traversal" ? npls : std::vector<unsigned>{1};
      for (unsigned npl : lines)
        for (unsigned lat : latencies)
          for (Topology t : {Topology::Baseline, Topology::Alternate}) {
            ExperimentConfig cfg;
            cfg.topology = t;
            cfg.latency = lat;
            cfg.workload = sweep_spec;
            cfg.workload.name = name;
            cfg.workload.nodes_per_line = npl;
            cfg.max_cycles = sweep_max_cycles;
            configs.push_back(cfg);
          }
    }
    return emit(sweep(configs, threads), sweep_format);
  } catch (const std::exception& e) {
    std::cerr << "pcsim: " << e.what() << "\n";
    return 1;
  }
}
