#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcsim/experiment.hpp"
#include "support/rigs.hpp"

using namespace pcsim;
using namespace pcsim::testing;

namespace {

MemResponse resp(MsgKind k, Line data = {}, bool hit = false, std::uint8_t opaque = 0) {
  MemResponse r;
  r.kind = k;
  r.data = data;
  r.hit = hit;
  r.opaque = opaque;
  return r;
}

// Init a line, then read it: the read must be a prefetcher hit.
const ExpectedHitTrace kInitThenRead = {
    {"in 100", resp(MsgKind::Init), std::nullopt},
    {"rd 100", resp(MsgKind::Read, line_of(1, 2, 3, 4), true), true},
};

std::vector<MemResponse> run_init_then_read(PrefetcherOptions opts) {
  PrefetcherBench b({{0, req(MsgKind::Init, 0x100, 0, line_of(1, 2, 3, 4))},
                     {0, req(MsgKind::Read, 0x100)}},
                    5, 0, opts);
  b.mem->image().write_line(0x100, line_of(1, 2, 3, 4));
  REQUIRE(b.run(2).completed);
  return b.sink->received();
}

}  // namespace

TEST_CASE("checking sink accepts matching traces") {
  const std::vector<MemResponse> obs = {resp(MsgKind::Init),
                                        resp(MsgKind::Read, line_of(1, 2, 3, 4), true)};
  CHECK(checking_sink(kInitThenRead, obs, HitCheck::Enabled).passed);
}

TEST_CASE("checking sink pinpoints the first mismatch") {
  std::vector<MemResponse> obs = {resp(MsgKind::Init),
                                  resp(MsgKind::Read, line_of(1, 2, 3, 5), true)};
  CheckReport r = checking_sink(kInitThenRead, obs, HitCheck::Enabled);
  CHECK_FALSE(r.passed);
  CHECK(r.failed_index == 1u);
  CHECK(r.message.find("data") != std::string::npos);

  obs[1] = resp(MsgKind::Read, line_of(1, 2, 3, 4), false);
  r = checking_sink(kInitThenRead, obs, HitCheck::Enabled);
  CHECK_FALSE(r.passed);
  CHECK(r.message.find("hit flag") != std::string::npos);
  CHECK(checking_sink(kInitThenRead, obs, HitCheck::Disabled).passed);

  obs.pop_back();
  r = checking_sink(kInitThenRead, obs, HitCheck::Enabled);
  CHECK_FALSE(r.passed);
  CHECK(r.failed_index == 1u);

  obs = {resp(MsgKind::Init, {}, false, 1)};
  CHECK(checking_sink(kInitThenRead, obs, HitCheck::Enabled).failed_index == 0u);
}

TEST_CASE("a prefetcher that never hits passes functionally but fails the hit check") {
  CHECK(checking_sink(kInitThenRead, run_init_then_read({}), HitCheck::Enabled).passed);

  PrefetcherOptions broken;
  broken.disable_prefetch = true;
  const auto obs = run_init_then_read(broken);
  CHECK(checking_sink(kInitThenRead, obs, HitCheck::Disabled).passed);
  const CheckReport r = checking_sink(kInitThenRead, obs, HitCheck::Enabled);
  CHECK_FALSE(r.passed);
  CHECK(r.failed_index == 1u);
}

TEST_CASE("test source honours its random delays and sends everything once") {
  std::vector<MemRequest> msgs(30);
  for (unsigned i = 0; i < 30; ++i) msgs[i].addr = 16 * i;
  System sys;
  auto& src = sys.add<TestSource>("src", msgs, 3, 2);
  auto& mem = sys.add<PipelinedMemory>("mem", 2);
  auto& sink = sys.add<TestSink>("sink", 2, 3);
  sys.connect(src.out, mem.req, "s>m");
  sys.connect(mem.resp, sink.in, "m>k");
  REQUIRE(sys.run_until([&] { return sink.received().size() == 30; }, 10'000).completed);
  CHECK(src.sent() == 30);
  CHECK(src.send_cycles().back() > 29);  // some delays were taken
  CHECK(sink.backpressure_cycles() > 0);
}

TEST_CASE("baseline rows have speedup 1 and alternate rows are relative to them") {
  std::vector<ExperimentConfig> configs;
  for (Topology t : {Topology::Baseline, Topology::Alternate}) {
    ExperimentConfig c;
    c.topology = t;
    c.latency = 10;
    c.workload.nodes = 16;
    configs.push_back(c);
  }
  const auto rows = sweep(configs, 2);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0].speedup.has_value());
  CHECK(*rows[0].speedup == 1.0);
  REQUIRE(rows[1].speedup.has_value());
  CHECK(*rows[1].speedup == doctest::Approx(double(rows[0].cycles) / rows[1].cycles));
}

TEST_CASE("every request the cache sends is classified by the prefetcher") {
  for (const char* name : {"traversal", "hashtable", "insertion", "random"}) {
    ExperimentConfig c;
    c.workload.name = name;
    c.workload.requests = 3000;
    c.latency = 12;
    const auto k = counters(run_experiment(c));
    CAPTURE(name);
    CHECK(k.at("pf.read_hits") + k.at("pf.read_misses") + k.at("pf.readcp_hits") +
              k.at("pf.readcp_misses") + k.at("pf.writes") ==
          k.at("cache.downstream_requests"));
    CHECK(k.at("pf.prefetches_issued") == k.at("pf.prefetch_fills") +
                                              k.at("pf.fills_discarded"));
  }
}

TEST_CASE("traversal prefetches are useful for every node but the first") {
  ExperimentConfig c;
  c.latency = 20;
  const RunStats s = run_experiment(c);
  CHECK(s.prefetch.useful_prefetch_hits == 63);
  CHECK(s.prefetch.readcp_misses == 1);
}

TEST_CASE("reports") {
  SUBCASE("empty CSV is just the header") {
    const std::string csv = report({}, ReportFormat::Csv);
    CHECK(csv.rfind("workload,topology,latency,cycles,speedup,cache.", 0) == 0);
    CHECK(csv.find("\n") == csv.size() - 1);
    CHECK(csv.find(",status\n") != std::string::npos);
  }
  std::vector<ExperimentConfig> configs;
  for (unsigned l : {2u, 40u})
    for (Topology t : {Topology::Baseline, Topology::Alternate}) {
      ExperimentConfig c;
      c.topology = t;
      c.latency = l;
      c.workload.name = "hanoi";
      configs.push_back(c);
    }
  const auto rows = sweep(configs, 3);
  SUBCASE("JSON round trip") {
    CHECK(rows_from_json(report(rows, ReportFormat::Json)) == rows);
    CHECK_THROWS_AS(rows_from_json("{\"rows\": [{}]}"), ConfigError);
    CHECK_THROWS_AS(rows_from_json("not json"), ConfigError);
  }
  SUBCASE("CSV has one line per row and a fixed column count") {
    const std::string csv = report(rows, ReportFormat::Csv);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    const std::size_t cols = counter_names().size() + 6;
    std::size_t start = 0;
    while (start < csv.size()) {
      const std::size_t end = csv.find('\n', start);
      const std::string line = csv.substr(start, end - start);
      CHECK(std::count(line.begin(), line.end(), ',') + 1 == static_cast<long>(cols));
      start = end + 1;
    }
  }
  SUBCASE("table mentions every row") {
    const std::string t = report(rows, ReportFormat::Table);
    CHECK(std::count(t.begin(), t.end(), '\n') == 5);
    CHECK(t.find("alternate") != std::string::npos);
  }
}

TEST_CASE("a failing config becomes an error row without stopping the sweep") {
  std::vector<ExperimentConfig> configs(2);
  configs[0].workload.name = "nope";
  configs[1].workload.nodes = 8;
  const auto rows = sweep(configs, 2);
  CHECK(rows[0].status == "error");
  CHECK_FALSE(rows[0].message.empty());
  CHECK(rows[1].status == "ok");
}

TEST_CASE("a watchdog expiry is reported as deadlock") {
  ExperimentConfig c;
  c.max_cycles = 50;
  const auto rows = sweep({c}, 1);
  CHECK(rows[0].status == "deadlock");
  CHECK(rows[0].message.find("core=") != std::string::npos);
}
