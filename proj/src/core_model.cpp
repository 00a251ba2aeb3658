#include "pcsim/core_model.hpp"

#include <fmt/format.h>

#include <istream>
#include <ostream>
#include <sstream>

namespace pcsim {

CoreToken CoreToken::read(Addr addr, std::uint8_t dst) {
  return load_rel(TokenKind::Read, dst, 0, static_cast<std::int32_t>(addr));
}

CoreToken CoreToken::read_cp(Addr addr, std::uint8_t dst) {
  return load_rel(TokenKind::ReadCP, dst, 0, static_cast<std::int32_t>(addr));
}

CoreToken CoreToken::write(Addr addr, Word value) {
  return store_rel_imm(0, static_cast<std::int32_t>(addr), value);
}

CoreToken CoreToken::compute(std::uint32_t n) {
  CoreToken t;
  t.kind = TokenKind::Compute;
  t.cycles = n;
  return t;
}

CoreToken CoreToken::load_rel(TokenKind kind, std::uint8_t dst,
                              std::uint8_t base, std::int32_t offset) {
  PCSIM_REQUIRE(kind == TokenKind::Read || kind == TokenKind::ReadCP,
                "load_rel: kind must be a load");
  PCSIM_REQUIRE(dst < kNumRegs && base < kNumRegs, "register out of range");
  CoreToken t;
  t.kind = kind;
  t.dst = dst;
  t.base = base;
  t.offset = offset;
  return t;
}

CoreToken CoreToken::store_rel(std::uint8_t base, std::int32_t offset,
                               std::uint8_t src) {
  PCSIM_REQUIRE(src < kNumRegs && base < kNumRegs, "register out of range");
  CoreToken t;
  t.kind = TokenKind::Write;
  t.base = base;
  t.offset = offset;
  t.value_from_reg = true;
  t.src = src;
  return t;
}

CoreToken CoreToken::store_rel_imm(std::uint8_t base, std::int32_t offset,
                                   Word imm) {
  PCSIM_REQUIRE(base < kNumRegs, "register out of range");
  CoreToken t;
  t.kind = TokenKind::Write;
  t.base = base;
  t.offset = offset;
  t.imm = imm;
  return t;
}

Addr effective_address(const CoreToken& t, const RegFile& regs) {
  const Word base = t.base == 0 ? 0 : regs[t.base];
  return base + static_cast<Addr>(t.offset);
}

namespace {

Word parse_hex(const std::string& text, int lineno) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(text, &used, 16);
    if (used != text.size() || v > 0xffffffffUL) throw std::invalid_argument(text);
    return static_cast<Word>(v);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("program line {}: bad hex value '{}'", lineno, text));
  }
}

}  // namespace

Program parse_program(std::istream& in) {
  Program prog;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream ls(raw);
    std::string op;
    if (!(ls >> op)) continue;
    std::string a, b, extra;
    ls >> a >> b >> extra;
    auto expect_args = [&](std::size_t n) {
      const std::size_t got = !a.empty() + !b.empty() + !extra.empty();
      if (got != n)
        throw ConfigError(fmt::format("program line {}: '{}' takes {} operand(s)",
                                      lineno, op, n));
    };
    auto aligned = [&](Addr addr) {
      if (addr % 4 != 0)
        throw ConfigError(fmt::format("program line {}: address {:#x} not word-aligned",
                                      lineno, addr));
      return addr;
    };
    if (op == "rd") {
      expect_args(1);
      prog.tokens.push_back(CoreToken::read(aligned(parse_hex(a, lineno))));
    } else if (op == "cp") {
      expect_args(1);
      prog.tokens.push_back(CoreToken::read_cp(aligned(parse_hex(a, lineno))));
    } else if (op == "wr") {
      expect_args(2);
      prog.tokens.push_back(
          CoreToken::write(aligned(parse_hex(a, lineno)), parse_hex(b, lineno)));
    } else if (op == "comp") {
      expect_args(1);
      try {
        std::size_t used = 0;
        const unsigned long n = std::stoul(a, &used, 10);
        if (used != a.size()) throw std::invalid_argument(a);
        prog.tokens.push_back(CoreToken::compute(static_cast<std::uint32_t>(n)));
      } catch (const std::exception&) {
        throw ConfigError(fmt::format("program line {}: bad cycle count '{}'", lineno, a));
      }
    } else {
      throw ConfigError(fmt::format("program line {}: unknown token '{}'", lineno, op));
    }
  }
  return prog;
}

void write_program(std::ostream& out, const Program& program) {
  for (const auto& t : program.tokens) {
    if (t.is_memory() && t.base != 0)
      throw ConfigError("write_program: register-relative tokens have no text form");
    const Addr addr = static_cast<Addr>(t.offset);
    switch (t.kind) {
      case TokenKind::Read: out << fmt::format("rd {:08x}\n", addr); break;
      case TokenKind::ReadCP: out << fmt::format("cp {:08x}\n", addr); break;
      case TokenKind::Write:
        if (t.value_from_reg)
          throw ConfigError("write_program: register-valued writes have no text form");
        out << fmt::format("wr {:08x} {:08x}\n", addr, t.imm);
        break;
      case TokenKind::Compute: out << fmt::format("comp {}\n", t.cycles); break;
    }
  }
}

CoreModel::CoreModel(std::string name, Program program)
    : Component(std::move(name)), program_(std::move(program)) {
  regs_ = program_.init_regs;
  regs_[0] = 0;
  pc_ = 0;
  while (pc_ < program_.tokens.size() &&
         program_.tokens[pc_].kind == TokenKind::Compute &&
         program_.tokens[pc_].cycles == 0)
    ++pc_;
  state_ = pc_ == program_.tokens.size() ? State::Done : State::Ready;
}

MemRequest CoreModel::current_request() const {
  const CoreToken& t = program_.tokens[pc_];
  MemRequest r;
  r.kind = t.kind == TokenKind::Read     ? MsgKind::Read
           : t.kind == TokenKind::ReadCP ? MsgKind::ReadCP
                                         : MsgKind::Write;
  r.addr = effective_address(t, regs_);
  r.len = 4;
  if (t.kind == TokenKind::Write)
    r.data.words[0] = t.value_from_reg ? (t.src == 0 ? 0 : regs_[t.src]) : t.imm;
  return r;
}

void CoreModel::evaluate() const {
  if (state_ == State::Ready && program_.tokens[pc_].is_memory())
    mem_req.send(current_request());
  else
    mem_req.idle();
  mem_resp.set_ready(state_ == State::WaitResp);
}

void CoreModel::advance() {
  ++pc_;
  while (pc_ < program_.tokens.size() &&
         program_.tokens[pc_].kind == TokenKind::Compute &&
         program_.tokens[pc_].cycles == 0)
    ++pc_;
  state_ = pc_ == program_.tokens.size() ? State::Done : State::Ready;
}

void CoreModel::commit() {
  switch (state_) {
    case State::Ready: {
      const CoreToken& t = program_.tokens[pc_];
      if (t.kind == TokenKind::Compute) {
        ++stats_.compute_cycles;
        compute_left_ = t.cycles - 1;
        if (compute_left_ == 0)
          advance();
        else
          state_ = State::Compute;
      } else if (mem_req.fired()) {
        issue_cycle_ = local_cycle_;
        issue_addr_ = current_request().addr;
        state_ = State::WaitResp;
      }
      break;
    }
    case State::WaitResp:
      ++stats_.memory_wait_cycles;
      if (mem_resp.fired()) {
        const CoreToken& t = program_.tokens[pc_];
        const MemResponse& r = mem_resp.peek();
        AccessRecord rec;
        rec.kind = t.kind;
        rec.addr = issue_addr_;
        rec.hit = r.hit;
        rec.latency = local_cycle_ - issue_cycle_;
        if (t.is_load()) {
          rec.value = r.data.words[0];
          if (t.dst != 0) regs_[t.dst] = rec.value;
          ++(t.kind == TokenKind::Read ? stats_.reads : stats_.readcps);
        } else {
          rec.value = t.value_from_reg ? (t.src == 0 ? 0 : regs_[t.src]) : t.imm;
          ++stats_.writes;
        }
        accesses_.push_back(rec);
        advance();
      }
      break;
    case State::Compute:
      ++stats_.compute_cycles;
      if (--compute_left_ == 0) advance();
      break;
    case State::Done:
      break;
  }
  ++local_cycle_;
}

std::string CoreModel::state_name() const {
  switch (state_) {
    case State::Ready:
      return program_.tokens[pc_].kind == TokenKind::Compute ? "X" : "M";
    case State::WaitResp: return "W";
    case State::Compute: return "X";
    case State::Done: return "D";
  }
  return "?";
}

}  // namespace pcsim
