#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <random>

#include "support/rigs.hpp"

using namespace pcsim;
using namespace pcsim::testing;

namespace {

Timed rd(Addr a, std::uint64_t at = 0) {
  MemRequest r = req(MsgKind::Read, a);
  r.len = 4;
  return {at, r};
}

Timed cp(Addr a, std::uint64_t at = 0) {
  MemRequest r = req(MsgKind::ReadCP, a);
  r.len = 4;
  return {at, r};
}

Timed wr(Addr a, Word v, std::uint64_t at = 0) {
  MemRequest r = req(MsgKind::Write, a);
  r.len = 4;
  r.data.words[0] = v;
  return {at, r};
}

std::uint64_t flush(CacheBench& b) {
  const std::uint64_t before = b.mem->stats().writes;
  b.cache->begin_flush();
  const RunOutcome out =
      b.sys.run_until([&] { return b.cache->idle() && b.mem->quiescent(); }, 10'000);
  REQUIRE(out.completed);
  return b.mem->stats().writes - before;
}

}  // namespace

TEST_CASE("a hit responds two cycles after acceptance") {
  CacheBench b({rd(0x100), rd(0x104)}, 10);
  b.mem->image().write_word(0x104, 77);
  REQUIRE(b.run(2).completed);
  CHECK_FALSE(b.sink->received()[0].hit);
  CHECK(b.sink->received()[1].hit);
  CHECK(b.sink->received()[1].data.words[0] == 77);
  CHECK(b.sink->receive_cycles()[1] - b.src->send_cycles()[1] == 2);
  CHECK(b.cache->stats().read_hits == 1);
  CHECK(b.cache->stats().read_misses == 1);
}

TEST_CASE("a clean read miss costs the memory latency plus four cycles") {
  for (unsigned latency : {1u, 2u, 5u, 40u}) {
    CacheBench b({rd(0x100)}, latency);
    REQUIRE(b.run(1).completed);
    CHECK(b.sink->receive_cycles()[0] - b.src->send_cycles()[0] == latency + 4);
  }
}

TEST_CASE("write miss allocates the line and keeps it dirty") {
  CacheBench b({wr(0x208, 5), rd(0x200)}, 4);
  b.mem->image().write_line(0x200, line_of(1, 2, 3, 4));
  REQUIRE(b.run(2).completed);
  CHECK(b.cache->stats().write_misses == 1);
  CHECK(b.mem->stats().reads == 1);
  CHECK(b.mem->stats().writes == 0);
  CHECK(b.sink->received()[1].hit);
  CHECK(b.sink->received()[1].data.words[0] == 1);
  const CacheLine& l = b.cache->lines()[split_address(0x200, kCacheGeometry).index];
  CHECK(l.dirty);
  CHECK(l.data == line_of(1, 2, 5, 4));
  CHECK(b.mem->image().read_word(0x208) == 3);
  CHECK(flush(b) == 1);
  CHECK(b.mem->image().read_word(0x208) == 5);
}

TEST_CASE("read_cp misses go downstream as read_cp with the full address") {
  CacheBench b({cp(0x123c), wr(0x4000, 1)}, 3);
  auto& down = channel_named<MemRequest>(b.sys, "$>m");
  std::vector<MemRequest> seen;
  for (int i = 0; i < 200 && !(b.src->done() && b.sink->received().size() == 2); ++i) {
    b.sys.step();
    if (down.fired()) seen.push_back(down.msg());
  }
  REQUIRE(seen.size() == 2);
  CHECK(seen[0].kind == MsgKind::ReadCP);
  CHECK(seen[0].addr == 0x123c);
  // The write miss allocates with a plain read.
  CHECK(seen[1].kind == MsgKind::Read);
  CHECK(seen[1].addr == 0x4000);
  CHECK(b.cache->stats().readcp_misses == 1);
  CHECK(b.cache->stats().downstream_requests == 2);
}

TEST_CASE("flush writes back exactly the dirty lines") {
  SUBCASE("none") {
    CacheBench b({rd(0x0), rd(0x10)}, 2);
    REQUIRE(b.run(2).completed);
    CHECK(flush(b) == 0);
  }
  SUBCASE("one") {
    CacheBench b({rd(0x0), wr(0x14, 9)}, 2);
    REQUIRE(b.run(2).completed);
    CHECK(flush(b) == 1);
    CHECK(b.mem->image().read_word(0x14) == 9);
  }
  SUBCASE("all sixteen") {
    std::vector<Timed> s;
    for (Addr i = 0; i < 16; ++i) s.push_back(wr(0x1000 + 16 * i, i + 1));
    CacheBench b(s, 2);
    REQUIRE(b.run(16).completed);
    CHECK(flush(b) == 16);
    CHECK(b.cache->stats().flush_writes == 16);
    for (Addr i = 0; i < 16; ++i) CHECK(b.mem->image().read_word(0x1000 + 16 * i) == i + 1);
    // A second flush finds nothing dirty.
    CHECK(flush(b) == 0);
  }
}

TEST_CASE("conflicting address evicts the dirty victim before refilling") {
  // 0x300 and 0x400 share cache index 0.
  CacheBench b({wr(0x300, 11), rd(0x400), rd(0x300)}, 5);
  b.mem->image().write_word(0x400, 22);
  REQUIRE(b.run(3).completed);
  CHECK(b.sink->received()[1].data.words[0] == 22);
  CHECK(b.sink->received()[2].data.words[0] == 11);
  CHECK(b.cache->stats().evictions == 1);
  CHECK(b.mem->image().read_word(0x300) == 11);
}

TEST_CASE("the cache holds at most one request at a time") {
  std::vector<Timed> s;
  for (Addr i = 0; i < 50; ++i) s.push_back(rd(0x40 * i));
  CacheBench b(s, 7, 2);
  for (int i = 0; i < 5000 && b.sink->received().size() < 50; ++i) {
    b.sys.step();
    REQUIRE(b.src->send_cycles().size() - b.sink->received().size() <= 1);
  }
  CHECK(b.sink->received().size() == 50);
}

TEST_CASE("contract violations") {
  SUBCASE("misaligned") {
    CacheBench b({rd(0x102)}, 2);
    CHECK_THROWS_AS(b.run(1), ContractViolation);
  }
  SUBCASE("init from the core side") {
    CacheBench b({{0, req(MsgKind::Init, 0x100)}}, 2);
    CHECK_THROWS_AS(b.run(1), ContractViolation);
  }
  SUBCASE("flush while busy") {
    CacheBench b({rd(0x100)}, 20);
    b.sys.step();
    b.sys.step();
    CHECK_THROWS_AS(b.cache->begin_flush(), ContractViolation);
  }
}

TEST_CASE("random streams match a flat word map, including after flush") {
  for (std::uint32_t seed = 1; seed <= 5; ++seed) {
    std::mt19937 gen(seed);
    std::map<Addr, Word> model;
    std::vector<Timed> s;
    std::vector<Word> expected;
    // 48 lines spread over three aliasing regions.
    auto addr = [&] { return 0x1000 * (gen() % 3) + 4 * (gen() % 192); };
    for (int i = 0; i < 10'000; ++i) {
      const Addr a = addr();
      switch (gen() % 3) {
        case 0: {
          const Word v = gen();
          s.push_back(wr(a, v));
          model[a] = v;
          expected.push_back(v);
          break;
        }
        case 1:
          s.push_back(rd(a));
          expected.push_back(model[a]);
          break;
        default:
          s.push_back(cp(a));
          expected.push_back(model[a]);
          break;
      }
    }
    CacheBench b(s, 1 + seed * 4, seed % 3);
    REQUIRE(b.run(s.size(), 2'000'000).completed);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const MemResponse& r = b.sink->received()[i];
      REQUIRE(r.kind == s[i].req.kind);
      if (r.kind != MsgKind::Write) REQUIRE(r.data.words[0] == expected[i]);
    }
    flush(b);
    for (const auto& [a, v] : model) REQUIRE(b.mem->image().read_word(a) == v);
    const auto& st = b.cache->stats();
    CHECK(st.read_hits + st.read_misses + st.write_hits + st.write_misses + st.readcp_hits +
              st.readcp_misses ==
          s.size());
  }
}
