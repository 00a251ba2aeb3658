// Abstract in-order core: executes a token program against the memory
// system, one outstanding memory request at a time.
//
// Loads write a small register file and addresses are formed as
// R[base] + offset (r0 reads as zero), so a ReadCP can name the next node
// through the value it loaded, as lw.cp does.

#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pcsim/mem_msg.hpp"
#include "pcsim/sim_kernel.hpp"

namespace pcsim {

inline constexpr unsigned kNumRegs = 16;

enum class TokenKind : std::uint8_t { Read, Write, ReadCP, Compute };

struct CoreToken {
  TokenKind kind = TokenKind::Compute;
  std::uint8_t dst = 0;   // load destination
  std::uint8_t base = 0;  // address register
  std::int32_t offset = 0;
  bool value_from_reg = false;  // write value: R[src] or imm
  std::uint8_t src = 0;
  Word imm = 0;
  std::uint32_t cycles = 0;  // Compute only

  static CoreToken read(Addr addr, std::uint8_t dst = 0);
  static CoreToken read_cp(Addr addr, std::uint8_t dst = 0);
  static CoreToken write(Addr addr, Word value);
  static CoreToken compute(std::uint32_t n);
  static CoreToken load_rel(TokenKind kind, std::uint8_t dst, std::uint8_t base,
                            std::int32_t offset);
  static CoreToken store_rel(std::uint8_t base, std::int32_t offset,
                             std::uint8_t src);
  static CoreToken store_rel_imm(std::uint8_t base, std::int32_t offset, Word imm);

  bool is_memory() const { return kind != TokenKind::Compute; }
  bool is_load() const { return kind == TokenKind::Read || kind == TokenKind::ReadCP; }

  friend bool operator==(const CoreToken&, const CoreToken&) = default;
};

using RegFile = std::array<Word, kNumRegs>;

struct Program {
  std::vector<CoreToken> tokens;
  RegFile init_regs{};

  friend bool operator==(const Program&, const Program&) = default;
};

Addr effective_address(const CoreToken& t, const RegFile& regs);

// Text format, one token per line: `rd <addr>`, `wr <addr> <val>`,
// `cp <addr>`, `comp <n>`. Numbers are hex with optional 0x prefix, except
// the compute count which is decimal. `#` starts a comment.
Program parse_program(std::istream& in);
// Only register-free (fixed-address) programs can be written.
void write_program(std::ostream& out, const Program& program);

struct AccessRecord {
  TokenKind kind = TokenKind::Read;
  Addr addr = 0;
  Word value = 0;  // loaded value (loads) or stored value (writes)
  bool hit = false;
  std::uint64_t latency = 0;  // cycles from request transfer to response transfer

  friend bool operator==(const AccessRecord&, const AccessRecord&) = default;
};

struct CoreStats {
  std::uint64_t reads = 0;
  std::uint64_t readcps = 0;
  std::uint64_t writes = 0;
  std::uint64_t compute_cycles = 0;
  std::uint64_t memory_wait_cycles = 0;
};

class CoreModel final : public Component {
 public:
  CoreModel(std::string name, Program program);

  OutPort<MemRequest> mem_req;
  InPort<MemResponse> mem_resp;

  void evaluate() const override;
  void commit() override;
  std::string state_name() const override;

  bool done() const { return state_ == State::Done; }
  const std::vector<AccessRecord>& accesses() const { return accesses_; }
  const RegFile& regs() const { return regs_; }
  const CoreStats& stats() const { return stats_; }

 private:
  enum class State : std::uint8_t { Ready, WaitResp, Compute, Done };

  MemRequest current_request() const;
  void advance();

  Program program_;
  std::size_t pc_ = 0;
  RegFile regs_{};
  State state_ = State::Ready;
  std::uint32_t compute_left_ = 0;
  std::uint64_t local_cycle_ = 0;
  std::uint64_t issue_cycle_ = 0;
  Addr issue_addr_ = 0;
  std::vector<AccessRecord> accesses_;
  CoreStats stats_;
};

}  // namespace pcsim
