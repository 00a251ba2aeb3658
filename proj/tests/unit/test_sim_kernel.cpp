#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "pcsim/core_model.hpp"
#include "pcsim/sim_kernel.hpp"
#include "pcsim/test_harness.hpp"

using namespace pcsim;

namespace {

std::vector<MemRequest> numbered_requests(unsigned n) {
  std::vector<MemRequest> out;
  for (unsigned i = 0; i < n; ++i) {
    MemRequest r;
    r.kind = MsgKind::Write;
    r.addr = 4 * i;
    r.data.words[0] = i;
    out.push_back(r);
  }
  return out;
}

// Offers a message exactly when its own channel is not valid: never settles.
class Oscillator final : public Component {
 public:
  using Component::Component;
  OutPort<MemRequest> out;
  InPort<MemRequest> in;
  void evaluate() const override {
    if (in.valid())
      out.idle();
    else
      out.send(MemRequest{});
  }
  void commit() override {}
  std::string state_name() const override { return "O"; }
};

// Copies ready from its input to its output each pass: a legal chain of
// combinational dependencies that needs several passes to settle.
class ReadyRelay final : public Component {
 public:
  using Component::Component;
  InPort<MemRequest> in;
  OutPort<MemRequest> out;
  void evaluate() const override {
    if (in.valid())
      out.send(in.peek());
    else
      out.idle();
    in.set_ready(out.ready());
  }
  void commit() override {}
  std::string state_name() const override { return "R"; }
};

// Always-ready sink of requests, or ready every other cycle when `alternate`.
class ReqSink final : public Component {
 public:
  explicit ReqSink(bool alternate = false) : Component("k"), alternate_(alternate) {}
  InPort<MemRequest> in;
  std::vector<MemRequest> got;
  void evaluate() const override { in.set_ready(!alternate_ || cycle_ % 2 == 0); }
  void commit() override {
    if (in.fired()) got.push_back(in.peek());
    ++cycle_;
  }
  std::string state_name() const override { return std::to_string(got.size()); }

 private:
  bool alternate_;
  unsigned cycle_ = 0;
};

}  // namespace

TEST_CASE("a port can be bound once") {
  System sys;
  auto& src = sys.add<TestSource>("src", numbered_requests(1));
  auto& a = sys.add<ReadyRelay>("a");
  auto& b = sys.add<ReadyRelay>("b");
  auto& c = sys.add<ReadyRelay>("c");
  sys.connect(src.out, b.in, "s>b");
  CHECK_THROWS_AS(sys.connect(src.out, a.in, "s>a"), ConfigError);
  CHECK_THROWS_AS(sys.connect(c.out, b.in, "c>b"), ConfigError);
}

TEST_CASE("an empty system still counts cycles") {
  System sys;
  sys.step();
  sys.step();
  CHECK(sys.cycle() == 2);
}

TEST_CASE("nothing transfers while the far end is never ready") {
  System sys;
  auto& src = sys.add<TestSource>("src", numbered_requests(5));
  auto& relay = sys.add<ReadyRelay>("relay");
  auto& relay2 = sys.add<ReadyRelay>("relay2");
  sys.connect(src.out, relay.in, "a");
  sys.connect(relay.out, relay2.in, "b");
  // relay2.out is unbound and therefore never ready.
  for (int i = 0; i < 20; ++i) sys.step();
  CHECK(src.sent() == 0);
  CHECK(sys.channels()[0]->val());
  CHECK(sys.channels()[0]->transfers() == 0);
}

TEST_CASE("source and sink with random stalls deliver every message in order") {
  for (unsigned delay : {0u, 1u, 4u}) {
    System sys;
    std::vector<MemResponse> as_resp;
    struct RespSource final : Component {
      std::vector<MemResponse> msgs;
      std::size_t next = 0;
      unsigned phase = 0;
      OutPort<MemResponse> out;
      explicit RespSource(std::vector<MemResponse> m) : Component("rs"), msgs(std::move(m)) {}
      void evaluate() const override {
        if (next < msgs.size() && phase % 3 != 1)
          out.send(msgs[next]);
        else
          out.idle();
      }
      void commit() override {
        if (out.fired()) ++next;
        ++phase;
      }
      std::string state_name() const override { return std::to_string(next); }
    };
    for (Word i = 0; i < 40; ++i) {
      MemResponse r;
      r.data.words[0] = i;
      as_resp.push_back(r);
    }
    auto& src = sys.add<RespSource>(as_resp);
    auto& sink = sys.add<TestSink>("sink", delay, 5);
    sys.connect(src.out, sink.in, "r");
    const RunOutcome out =
        sys.run_until([&] { return sink.received().size() == as_resp.size(); }, 10'000);
    REQUIRE(out.completed);
    CHECK(sink.received() == as_resp);
    if (delay > 0) CHECK(sink.backpressure_cycles() > 0);
  }
}

TEST_CASE("unbound memory side yields a deadlock report, not a hang") {
  System sys;
  Program p;
  p.tokens = {CoreToken::read(0x40)};
  auto& core = sys.add<CoreModel>("core", p);
  const RunOutcome out = sys.run_until([&] { return core.done(); }, 100);
  CHECK_FALSE(out.completed);
  CHECK(out.cycles == 100);
  CHECK(out.diagnostic.find("core=") != std::string::npos);
}

TEST_CASE("a combinational loop is reported") {
  System sys;
  auto& osc = sys.add<Oscillator>("osc");
  sys.connect(osc.out, osc.in, "loop");
  CHECK_THROWS_AS(sys.step(), SimError);
}

TEST_CASE("multi-pass settling reaches a fixed point") {
  System sys;
  auto& src = sys.add<TestSource>("src", numbered_requests(1));
  // Relays are added in reverse order so ready must ripple backwards over
  // several passes before the source sees it.
  auto& r3 = sys.add<ReadyRelay>("r3");
  auto& r2 = sys.add<ReadyRelay>("r2");
  auto& r1 = sys.add<ReadyRelay>("r1");
  auto& sink = sys.add<ReqSink>();
  sys.connect(src.out, r1.in, "a");
  sys.connect(r1.out, r2.in, "b");
  sys.connect(r2.out, r3.in, "c");
  sys.connect(r3.out, sink.in, "d");
  sys.step();
  CHECK(src.sent() == 1);
  REQUIRE(sink.got.size() == 1);
  CHECK(sink.got[0] == numbered_requests(1)[0]);
}

TEST_CASE("identical systems produce identical traces") {
  auto trace_of = [] {
    System sys;
    auto& src = sys.add<TestSource>("src", numbered_requests(10), 3, 9);
    auto& relay = sys.add<ReadyRelay>("relay");
    auto& sink = sys.add<ReqSink>(true);
    sys.connect(src.out, relay.in, "s>r");
    sys.connect(relay.out, sink.in, "r>k");
    std::ostringstream os;
    sys.set_trace(&os);
    for (int i = 0; i < 60; ++i) sys.step();
    return os.str();
  };
  const std::string a = trace_of();
  CHECK(a == trace_of());
  CHECK(a.rfind("  cycle | src", 0) == 0);
  CHECK(a.find("wr 00000000 op=0 data=00000000") != std::string::npos);
}
