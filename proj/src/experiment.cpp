#include "pcsim/experiment.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <json.hpp>
#include <thread>

namespace pcsim {

const char* topology_name(Topology t) {
  return t == Topology::Baseline ? "baseline" : "alternate";
}

Topology parse_topology(const std::string& name) {
  if (name == "baseline") return Topology::Baseline;
  if (name == "alternate") return Topology::Alternate;
  throw ConfigError("unknown topology '" + name + "'");
}

MemorySystem build_system(Topology topology, unsigned latency, Program program,
                          const MemoryImage& image, PrefetcherOptions pf_opts) {
  MemorySystem ms;
  ms.core = &ms.sys.add<CoreModel>("core", std::move(program));
  ms.cache = &ms.sys.add<BlockingCache>("cache");
  if (topology == Topology::Alternate)
    ms.prefetcher = &ms.sys.add<PointerChasePrefetcher>("pf", pf_opts);
  ms.memory = &ms.sys.add<PipelinedMemory>("mem", latency);
  ms.memory->image() = image;

  ms.sys.connect(ms.core->mem_req, ms.cache->core_req, "c>$");
  ms.sys.connect(ms.cache->core_resp, ms.core->mem_resp, "$>c");
  if (ms.prefetcher) {
    ms.sys.connect(ms.cache->mem_req, ms.prefetcher->cache_req, "$>pf");
    ms.sys.connect(ms.prefetcher->cache_resp, ms.cache->mem_resp, "pf>$");
    ms.sys.connect(ms.prefetcher->mem_req, ms.memory->req, "pf>m");
    ms.sys.connect(ms.memory->resp, ms.prefetcher->mem_resp, "m>pf");
  } else {
    ms.sys.connect(ms.cache->mem_req, ms.memory->req, "$>m");
    ms.sys.connect(ms.memory->resp, ms.cache->mem_resp, "m>$");
  }
  return ms;
}

std::uint64_t flush_dirty(MemorySystem& ms, std::uint64_t max_cycles) {
  const std::uint64_t before = ms.cache->stats().flush_writes;
  ms.cache->begin_flush();
  const RunOutcome out = ms.sys.run_until(
      [&] {
        return ms.cache->idle() && ms.memory->quiescent() &&
               (!ms.prefetcher ||
                (ms.prefetcher->idle() && !ms.prefetcher->buffer().busy));
      },
      max_cycles);
  if (!out.completed) throw SimError("flush did not drain: " + out.diagnostic);
  return ms.cache->stats().flush_writes - before;
}

RunStats run_experiment(const ExperimentConfig& config) {
  Workload w = make_workload(config.workload);
  MemorySystem ms = build_system(config.topology, config.latency, std::move(w.program),
                                 w.image, config.prefetcher);
  if (config.trace) ms.sys.set_trace(config.trace);

  RunStats stats;
  const RunOutcome out =
      ms.sys.run_until([&] { return ms.core->done(); }, config.max_cycles);
  stats.completed = out.completed;
  stats.diagnostic = out.diagnostic;
  stats.cycles = out.cycles;
  if (out.completed) stats.flush_writes = flush_dirty(ms);

  stats.core = ms.core->stats();
  stats.cache = ms.cache->stats();
  if (ms.prefetcher) stats.prefetch = ms.prefetcher->stats();
  stats.memory = ms.memory->stats();
  stats.accesses = ms.core->accesses();
  stats.final_image = ms.memory->image();
  return stats;
}

std::map<std::string, std::uint64_t> counters(const RunStats& s) {
  return {
      {"cache.downstream_requests", s.cache.downstream_requests},
      {"cache.evictions", s.cache.evictions},
      {"cache.flush_writes", s.cache.flush_writes},
      {"cache.read_hits", s.cache.read_hits},
      {"cache.read_misses", s.cache.read_misses},
      {"cache.readcp_hits", s.cache.readcp_hits},
      {"cache.readcp_misses", s.cache.readcp_misses},
      {"cache.write_hits", s.cache.write_hits},
      {"cache.write_misses", s.cache.write_misses},
      {"core.compute_cycles", s.core.compute_cycles},
      {"core.memory_wait_cycles", s.core.memory_wait_cycles},
      {"core.readcps", s.core.readcps},
      {"core.reads", s.core.reads},
      {"core.writes", s.core.writes},
      {"mem.max_occupancy", s.memory.max_occupancy},
      {"mem.reads", s.memory.reads},
      {"mem.stall_cycles", s.memory.stall_cycles},
      {"mem.writes", s.memory.writes},
      {"pf.data_invalid_waits", s.prefetch.data_invalid_waits},
      {"pf.fills_discarded", s.prefetch.fills_discarded},
      {"pf.null_pointers", s.prefetch.null_pointers},
      {"pf.prefetch_fills", s.prefetch.prefetch_fills},
      {"pf.prefetches_dropped", s.prefetch.prefetches_dropped},
      {"pf.prefetches_issued", s.prefetch.prefetches_issued},
      {"pf.read_hits", s.prefetch.read_hits},
      {"pf.read_misses", s.prefetch.read_misses},
      {"pf.readcp_hits", s.prefetch.readcp_hits},
      {"pf.readcp_misses", s.prefetch.readcp_misses},
      {"pf.useful_prefetch_hits", s.prefetch.useful_prefetch_hits},
      {"pf.write_hits", s.prefetch.write_hits},
      {"pf.writes", s.prefetch.writes},
  };
}

const std::vector<std::string>& counter_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, value] : counters(RunStats{})) out.push_back(name);
    return out;
  }();
  return names;
}

std::string workload_label(const WorkloadSpec& s) {
  const unsigned gap = s.gap.value_or(default_gap(s.name));
  if (s.name == "traversal")
    return fmt::format("traversal:n={}:npl={}:gap={}:seed={}", s.nodes, s.nodes_per_line,
                       gap, s.seed);
  if (s.name == "insertion")
    return fmt::format("insertion:n={}:ins={}:gap={}:seed={}", s.nodes, s.inserts, gap,
                       s.seed);
  if (s.name == "hashtable")
    return fmt::format("hashtable:b={}:k={}:l={}:gap={}:seed={}", s.buckets, s.keys,
                       s.lookups, gap, s.seed);
  if (s.name == "hanoi") return fmt::format("hanoi:disks={}:gap={}", s.disks, gap);
  if (s.name == "array") return fmt::format("array:n={}:gap={}", s.elements, gap);
  if (s.name == "random") return fmt::format("random:n={}:seed={}", s.requests, s.seed);
  if (s.name == "file") return "file:" + s.program_path;
  return s.name;
}

ResultRow make_row(const ExperimentConfig& config, const RunStats& stats) {
  ResultRow row;
  row.workload = workload_label(config.workload);
  row.topology = topology_name(config.topology);
  row.latency = config.latency;
  row.cycles = stats.cycles;
  row.counters = counters(stats);
  if (!stats.completed) {
    row.status = "deadlock";
    row.message = stats.diagnostic;
  }
  return row;
}

void fill_speedups(std::vector<ResultRow>& rows) {
  std::map<std::pair<std::string, unsigned>, std::uint64_t> base;
  for (const auto& r : rows)
    if (r.topology == "baseline" && r.status == "ok")
      base.emplace(std::pair{r.workload, r.latency}, r.cycles);
  for (auto& r : rows) {
    r.speedup.reset();
    if (r.status != "ok" || r.cycles == 0) continue;
    auto it = base.find({r.workload, r.latency});
    if (it != base.end())
      r.speedup = static_cast<double>(it->second) / static_cast<double>(r.cycles);
  }
}

std::vector<ResultRow> sweep(const std::vector<ExperimentConfig>& configs,
                             unsigned threads) {
  std::vector<ResultRow> rows(configs.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<std::size_t>(configs.size(), 1));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      const ExperimentConfig& cfg = configs[i];
      try {
        rows[i] = make_row(cfg, run_experiment(cfg));
      } catch (const std::exception& e) {
        ResultRow r;
        r.workload = workload_label(cfg.workload);
        r.topology = topology_name(cfg.topology);
        r.latency = cfg.latency;
        r.counters = counters(RunStats{});
        r.status = "error";
        r.message = e.what();
        rows[i] = std::move(r);
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  fill_speedups(rows);
  return rows;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "csv") return ReportFormat::Csv;
  if (name == "json") return ReportFormat::Json;
  throw ConfigError("unknown report format '" + name + "'");
}

namespace {

std::string speedup_text(const std::optional<double>& s) {
  return s ? fmt::format("{:.6f}", *s) : std::string{};
}

std::string render_csv(const std::vector<ResultRow>& rows) {
  std::string out = "workload,topology,latency,cycles,speedup";
  for (const auto& name : counter_names()) out += "," + name;
  out += ",status\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}", r.workload, r.topology, r.latency, r.cycles,
                       speedup_text(r.speedup));
    for (const auto& name : counter_names()) {
      auto it = r.counters.find(name);
      out += it == r.counters.end() ? "," : fmt::format(",{}", it->second);
    }
    out += "," + r.status + "\n";
  }
  return out;
}

std::string render_table(const std::vector<ResultRow>& rows) {
  std::size_t wl = 8;
  for (const auto& r : rows) wl = std::max(wl, r.workload.size());
  std::string out = fmt::format("{:<{}}  {:<9}  {:>7}  {:>10}  {:>8}  {:>8}  {}\n",
                                "workload", wl, "topology", "latency", "cycles", "speedup",
                                "improv%", "status");
  for (const auto& r : rows) {
    const std::string improv =
        r.speedup ? fmt::format("{:.2f}", (*r.speedup - 1.0) * 100.0) : std::string{};
    out += fmt::format("{:<{}}  {:<9}  {:>7}  {:>10}  {:>8}  {:>8}  {}{}\n", r.workload, wl,
                       r.topology, r.latency, r.cycles,
                       r.speedup ? fmt::format("{:.4f}", *r.speedup) : std::string{},
                       improv, r.status, r.message.empty() ? "" : " (" + r.message + ")");
  }
  return out;
}

std::string render_json(const std::vector<ResultRow>& rows) {
  nlohmann::json doc;
  doc["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["workload"] = r.workload;
    j["topology"] = r.topology;
    j["latency"] = r.latency;
    j["cycles"] = r.cycles;
    j["speedup"] = r.speedup ? nlohmann::json(*r.speedup) : nlohmann::json(nullptr);
    j["counters"] = r.counters;
    j["status"] = r.status;
    j["message"] = r.message;
    doc["rows"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

}  // namespace

std::string report(const std::vector<ResultRow>& rows, ReportFormat format) {
  switch (format) {
    case ReportFormat::Table: return render_table(rows);
    case ReportFormat::Csv: return render_csv(rows);
    case ReportFormat::Json: return render_json(rows);
  }
  return {};
}

std::vector<ResultRow> rows_from_json(const std::string& text) {
  std::vector<ResultRow> rows;
  try {
    const auto doc = nlohmann::json::parse(text);
    for (const auto& j : doc.at("rows")) {
      ResultRow r;
      r.workload = j.at("workload").get<std::string>();
      r.topology = j.at("topology").get<std::string>();
      r.latency = j.at("latency").get<unsigned>();
      r.cycles = j.at("cycles").get<std::uint64_t>();
      if (!j.at("speedup").is_null()) r.speedup = j.at("speedup").get<double>();
      r.counters = j.at("counters").get<std::map<std::string, std::uint64_t>>();
      r.status = j.at("status").get<std::string>();
      r.message = j.at("message").get<std::string>();
      rows.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("results json: ") + e.what());
  }
  return rows;
}

}  // namespace pcsim
