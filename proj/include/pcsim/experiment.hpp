// Builds baseline (core-cache-memory) and alternate
// (core-cache-prefetcher-memory) systems, runs workloads on them and
// reports the results.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcsim/blocking_cache.hpp"
#include "pcsim/core_model.hpp"
#include "pcsim/pipelined_memory.hpp"
#include "pcsim/prefetcher.hpp"
#include "pcsim/sim_kernel.hpp"
#include "pcsim/workloads.hpp"

namespace pcsim {

enum class Topology { Baseline, Alternate };

const char* topology_name(Topology t);
Topology parse_topology(const std::string& name);

struct MemorySystem {
  System sys;
  CoreModel* core = nullptr;
  BlockingCache* cache = nullptr;
  PointerChasePrefetcher* prefetcher = nullptr;  // null in the baseline
  PipelinedMemory* memory = nullptr;
};

MemorySystem build_system(Topology topology, unsigned latency, Program program,
                          const MemoryImage& image, PrefetcherOptions pf_opts = {});

// Writes back every dirty cache line; returns the number of lines written.
// Throws SimError if the hierarchy does not drain within max_cycles.
std::uint64_t flush_dirty(MemorySystem& ms, std::uint64_t max_cycles = 1'000'000);

inline constexpr std::uint64_t kDefaultMaxCycles = 10'000'000;

struct ExperimentConfig {
  Topology topology = Topology::Alternate;
  unsigned latency = 5;
  WorkloadSpec workload;
  std::uint64_t max_cycles = kDefaultMaxCycles;
  PrefetcherOptions prefetcher;
  std::ostream* trace = nullptr;
};

struct RunStats {
  bool completed = false;
  std::string diagnostic;        // deadlock report with final FSM states
  std::uint64_t cycles = 0;      // cycles until the program retired
  std::uint64_t flush_writes = 0;
  CoreStats core;
  CacheStats cache;
  PrefetchStats prefetch;        // all zero in the baseline
  MemoryStats memory;
  std::vector<AccessRecord> accesses;
  MemoryImage final_image;       // after the flush
};

RunStats run_experiment(const ExperimentConfig& config);

// Counter columns, sorted by name. Every run reports the same set.
std::map<std::string, std::uint64_t> counters(const RunStats& stats);
const std::vector<std::string>& counter_names();

std::string workload_label(const WorkloadSpec& spec);

struct ResultRow {
  std::string workload;
  std::string topology;
  unsigned latency = 0;
  std::uint64_t cycles = 0;
  std::optional<double> speedup;  // baseline cycles / this row's cycles
  std::map<std::string, std::uint64_t> counters;
  std::string status = "ok";      // ok | deadlock | error
  std::string message;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

ResultRow make_row(const ExperimentConfig& config, const RunStats& stats);

// Runs every config on its own system instance, up to `threads` at a time.
// A failing config yields an error row; the others still run. Rows come
// back in config order with speedups filled in against the matching
// baseline row.
std::vector<ResultRow> sweep(const std::vector<ExperimentConfig>& configs,
                             unsigned threads = 0);

void fill_speedups(std::vector<ResultRow>& rows);

enum class ReportFormat { Table, Csv, Json };
ReportFormat parse_report_format(const std::string& name);

std::string report(const std::vector<ResultRow>& rows, ReportFormat format);
std::vector<ResultRow> rows_from_json(const std::string& text);

}  // namespace pcsim
